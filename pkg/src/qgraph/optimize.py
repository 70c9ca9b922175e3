"""Spectral-gap optimization over the length simplex.

Maximization runs simplex-projected ascent on the exact gradient of k1^2
(minus the edge energies) while the gap is simple, symmetrizes dangling
edges and loops (provably non-decreasing) when it is not, pins edges that
hit the lower length bound and contracts them after a few iterations so
boundary supremizers are reached exactly, and reduces over random
restarts.  Infimization is constructive: all length onto one bridge (unit
interval, gap pi) or onto one cycle edge (circle, gap 2 pi).  A simplex
grid brute force serves as ground truth on small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidGroupError,
    InvalidInputError,
    NotApplicableError,
    ResourceBudgetError,
)
from ._parallel import parallel_map
from .graph import (
    DiscreteGraph,
    LengthVector,
    MetricGraph,
    contract_with_maps,
    find_bridges,
)
from . import families
from .spectral import (
    BondScattering,
    MULTIPLICITY_SCALE,
    _scan_interval,
    eigenfunction,
    scan_step,
    spectral_gap,
)

GAP_SLACK = 1e-10   # moves must not lose more than this
CLUSTER_WINDOW = 2e-4   # branches within k1 * (1 + this) steer the ascent together


# ---------------------------------------------------------------------------
# closed-form catalog
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    family: str
    params: tuple[int, ...]
    graph: DiscreteGraph
    lengths: LengthVector
    gap: float
    multiplicity: int | None


def catalog_entry(family: str, *params: int) -> CatalogEntry:
    """Canonical lengths and closed-form gap for a named family.

    Families: star E, flower E, stower (Ep, El), mandarin E, necklace B,
    standarin (n, M, S).  The stower (1, 1) has no equilateral maximizer
    (its supremizer is a single loop) and is rejected.
    """
    if family == "star":
        (E,) = params
        if E < 2:
            raise InvalidInputError("star family needs E >= 2")
        g, l = families.star(E)
        return CatalogEntry(family, params, g, l, math.pi * E / 2.0, E - 1)
    if family == "flower":
        (E,) = params
        if E < 1:
            raise InvalidInputError("flower family needs E >= 1")
        g, l = families.flower(E)
        return CatalogEntry(family, params, g, l, math.pi * E if E > 1 else 2 * math.pi,
                            E - 1 if E > 1 else 2)
    if family == "stower":
        Ep, El = params
        if Ep + El < 2:
            raise InvalidInputError("stower family needs Ep + El >= 2")
        if (Ep, El) == (1, 1):
            raise InvalidInputError(
                "stower (1,1) has no equilateral maximizer; its supremizer is a single loop"
            )
        g, l = families.stower(Ep, El)
        return CatalogEntry(family, params, g, l, math.pi * (2 * Ep + El) / 2.0, Ep + El - 1)
    if family == "mandarin":
        (E,) = params
        g, l = families.mandarin(E)
        # the sine-difference modes span E-1 dimensions and the symmetric
        # cosine mode adds one, so the gap pi E carries multiplicity E
        return CatalogEntry(family, params, g, l, math.pi * E, E)
    if family == "necklace":
        (B,) = params
        g, l = families.necklace(B)
        return CatalogEntry(family, params, g, l, 2 * math.pi, None)
    if family == "standarin":
        n, M, S = params
        g, l = families.standarin_chain(n, M, S)
        return CatalogEntry(family, params, g, l, math.pi * n, 1)
    raise InvalidInputError(f"unknown catalog family {family!r}")


def catalog_gap(entry: CatalogEntry) -> float:
    return entry.gap


def full_catalog() -> list[CatalogEntry]:
    entries = []
    for E in (2, 3, 4, 5):
        entries.append(catalog_entry("star", E))
    for E in (2, 3, 4):
        entries.append(catalog_entry("flower", E))
    for Ep, El in ((3, 2), (2, 2), (1, 2), (1, 3), (2, 1), (3, 1)):
        entries.append(catalog_entry("stower", Ep, El))
    for E in (2, 3, 4):
        entries.append(catalog_entry("mandarin", E))
    for B in (1, 2, 3):
        entries.append(catalog_entry("necklace", B))
    for n, M, S in ((2, 1, 1), (2, 2, 0), (2, 1, 2), (2, 2, 1), (2, 3, 0)):
        entries.append(catalog_entry("standarin", n, M, S))
    return entries


def upper_bound(g: DiscreteGraph) -> float:
    """Global bound k1 <= pi (E - El/2), El counting leaf edges.

    Not applicable for (E, El) in {(1,1), (1,0), (2,1)} (single interval,
    single loop, lasso), where the bound fails or degenerates.
    """
    E = g.edge_count
    El = len(g.leaf_edges())
    if (E, El) in ((1, 1), (1, 0), (2, 1)):
        raise NotApplicableError(f"bound excluded for (E, El) = ({E}, {El})")
    return math.pi * (E - El / 2.0)


# ---------------------------------------------------------------------------
# symmetrization of dangling edges and loops
# ---------------------------------------------------------------------------


def symmetrizable_groups(g: DiscreteGraph) -> list[tuple[int, str, tuple[int, ...]]]:
    """(vertex, kind, edge ids) for every group of >= 2 dangling edges or loops."""
    deg = g.degrees()
    groups = []
    for v in range(g.vertex_count):
        loops = tuple(e for e, (a, b) in enumerate(g.edges) if a == v and b == v)
        dangling = tuple(
            e
            for e, (a, b) in enumerate(g.edges)
            if a != b and ((a == v and deg[b] == 1) or (b == v and deg[a] == 1))
        )
        if len(loops) >= 2:
            groups.append((v, "loops", loops))
        if len(dangling) >= 2:
            groups.append((v, "dangling", dangling))
    return groups


def symmetrize(m: MetricGraph, v: int, group) -> LengthVector:
    """Replace the group's lengths by their mean; the gap cannot decrease.

    The group must consist entirely of dangling edges at v or entirely of
    loops at v, and the graph must have at least three edges.
    """
    g = m.graph
    group = tuple(sorted(int(e) for e in group))
    if len(group) < 2:
        raise InvalidGroupError("symmetrization needs at least two edges")
    if g.edge_count < 3:
        raise InvalidGroupError("symmetrization requires a graph with E >= 3")
    deg = g.degrees()
    kinds = set()
    for e in group:
        a, b = g.edges[e]
        if a == v and b == v:
            kinds.add("loops")
        elif (a == v and deg[b] == 1) or (b == v and deg[a] == 1):
            kinds.add("dangling")
        else:
            raise InvalidGroupError(f"edge {e} is neither a loop nor a dangling edge at {v}")
    if len(kinds) != 1:
        raise InvalidGroupError("cannot mix loops and dangling edges in one group")
    lengths = m.lengths.copy()
    lengths[list(group)] = lengths[list(group)].mean()
    return LengthVector(lengths / lengths.sum())


# ---------------------------------------------------------------------------
# optimization results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceStep:
    gap: float
    step: float
    move: str


@dataclass(frozen=True)
class OptimizationResult:
    lengths: LengthVector           # original edge indexing; zeros = contracted
    gap: float
    classification: str
    trace: tuple[TraceStep, ...]

    def to_dict(self) -> dict:
        return {
            "lengths": [float(x) for x in self.lengths.values],
            "gap": self.gap,
            "classification": self.classification,
            "trace": [{"gap": t.gap, "step": t.step, "move": t.move} for t in self.trace],
        }


@dataclass
class MaximizeOptions:
    max_iters: int = 120
    seeds: int = 10
    seed: int = 0
    l_min: float = 1e-4
    pin_iters: int = 5
    step_scale: float = 0.1
    improve_tol: float = 1e-9


def _project_simplex_lb(y: np.ndarray, l_min: float) -> np.ndarray:
    """Euclidean projection onto { x >= l_min, sum x = 1 }."""
    n = y.size
    budget = 1.0 - n * l_min
    if budget < 0:
        raise InvalidInputError("lower bound infeasible")
    z = y - l_min
    u = np.sort(z)[::-1]
    css = np.cumsum(u) - budget
    rho = np.nonzero(u * np.arange(1, n + 1) > css)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(z - tau, 0.0) + l_min


class _AscentState:
    """Lengths on a (possibly contracted) topology plus the original indexing."""

    def __init__(self, g: DiscreteGraph, lengths: np.ndarray, orig_map: list[int | None]):
        self.graph = g
        self.lengths = lengths
        self.orig_map = orig_map          # original edge -> current index or None
        self.pin_count = np.zeros(g.edge_count, dtype=int)

    def metric(self) -> MetricGraph:
        return MetricGraph(self.graph, self.lengths)

    def original_lengths(self, n_orig: int) -> LengthVector:
        out = np.zeros(n_orig)
        for orig, cur in enumerate(self.orig_map):
            if cur is not None:
                out[orig] = self.lengths[cur]
        return LengthVector(out)


def _contract_state(state: _AscentState, to_zero: list[int]) -> _AscentState:
    lv = state.lengths.copy()
    lv[to_zero] = 0.0
    lv = lv / lv.sum()
    mg, _, edge_map = contract_with_maps(state.graph, LengthVector(lv))
    new_map: list[int | None] = []
    for cur in state.orig_map:
        new_map.append(None if cur is None else edge_map[cur])
    return _AscentState(mg.graph, mg.lengths.copy(), new_map)


def _gap(m: MetricGraph) -> tuple[float, int]:
    return spectral_gap(m)


def _cluster_energies(m: MetricGraph) -> tuple[float, int, np.ndarray]:
    """Gap, cluster size, and eigenspace-averaged edge energies.

    Near-degenerate gaps make single-branch gradients zigzag across the
    eigenvalue crossing; averaging the energies over every branch within
    a relative window of k1 gives a stable ascent direction (for a truly
    multiple gap this is the basis-independent eigenspace trace).
    """
    k1, mult = spectral_gap(m)
    bs = BondScattering(m)
    dk = scan_step(m)
    tau = MULTIPLICITY_SCALE * bs.n_bonds
    hi = k1 * (1.0 + CLUSTER_WINDOW)
    cluster = _scan_interval(bs, k1 - 1e-7, hi, min(dk, k1 * CLUSTER_WINDOW / 16), tau)
    if not cluster:
        cluster = [(k1, mult)]
    total = np.zeros(m.graph.edge_count)
    dims = 0
    for k, _ in cluster:
        for f in eigenfunction(m, k):
            total += f.energies()
            dims += 1
    return k1, dims, total / dims


def _single_ascent(
    state: _AscentState, opts: MaximizeOptions, trace: list[TraceStep]
) -> tuple[_AscentState, float]:
    gap, mult = _gap(state.metric())
    trace.append(TraceStep(gap, 0.0, "init"))

    for _ in range(opts.max_iters):
        moved = False

        # symmetrization moves are non-decreasing whenever they apply
        if state.graph.edge_count >= 3:
            for v, _kind, group in symmetrizable_groups(state.graph):
                vals = state.lengths[list(group)]
                if vals.max() - vals.min() <= 1e-13:
                    continue
                cand = state.lengths.copy()
                cand[list(group)] = vals.mean()
                cand /= cand.sum()
                cand_gap, cand_mult = _gap(MetricGraph(state.graph, cand))
                if cand_gap >= gap - GAP_SLACK:
                    state.lengths = cand
                    if cand_gap > gap + opts.improve_tol:
                        moved = True
                    gap, mult = cand_gap, cand_mult
                    trace.append(TraceStep(gap, 0.0, "symmetrize"))

        # ascent step along the eigenspace-averaged energy gradient; gradient
        # moves must strictly improve (the slack is reserved for the provably
        # non-decreasing moves, otherwise slack-sized losses can accumulate)
        _, _, energies = _cluster_energies(state.metric())
        direction = energies.mean() - energies
        norm = float(np.linalg.norm(direction))
        if norm > 1e-12 * energies.mean():
            eta = opts.step_scale / norm
            accepted = None
            for _halving in range(40):
                cand = _project_simplex_lb(state.lengths + eta * direction, opts.l_min)
                if np.allclose(cand, state.lengths, atol=1e-15):
                    break
                cand_gap, cand_mult = _gap(MetricGraph(state.graph, cand))
                if cand_gap > gap + opts.improve_tol:
                    accepted = (cand, cand_gap, cand_mult, eta)
                    break
                eta *= 0.5
            # expand the step while it keeps improving
            while accepted is not None:
                eta2 = accepted[3] * 2.0
                cand = _project_simplex_lb(state.lengths + eta2 * direction, opts.l_min)
                if np.allclose(cand, accepted[0], atol=1e-15):
                    break
                cand_gap, cand_mult = _gap(MetricGraph(state.graph, cand))
                if cand_gap > accepted[1] + opts.improve_tol:
                    accepted = (cand, cand_gap, cand_mult, eta2)
                else:
                    break
            if accepted is not None:
                state.lengths = accepted[0]
                gap, mult = accepted[1], accepted[2]
                trace.append(TraceStep(gap, accepted[3], "gradient"))
                moved = True

        # nonsmooth stalls (gap maximum at an eigenvalue crossing): probe
        # boundary moves, symmetrized, keeping the best strictly improving
        # one.  Candidates: drop one edge at a time, or contract every
        # internal edge at once (the stower realization, which is how the
        # closed-form supremizers of trees and of non-tree graphs arise).
        if not moved and state.graph.edge_count >= 2:
            # the fully equilateral point first: exact maximizer for mandarin
            # topologies, where no dangling/loop symmetrization applies
            cand = np.full(state.graph.edge_count, 1.0 / state.graph.edge_count)
            if not np.allclose(cand, state.lengths, atol=1e-14):
                cand_gap, cand_mult = _gap(MetricGraph(state.graph, cand))
                if cand_gap > gap + opts.improve_tol:
                    state.lengths = cand
                    gap, mult = cand_gap, cand_mult
                    trace.append(TraceStep(gap, 0.0, "equalize"))
                    moved = True

        if not moved and state.graph.edge_count >= 2:
            probes: list[list[int]] = [[e] for e in range(state.graph.edge_count)]
            leaf_edges = set(state.graph.leaf_edges())
            loops = {e for e in range(state.graph.edge_count) if state.graph.is_loop(e)}
            internal = [
                e for e in range(state.graph.edge_count)
                if e not in leaf_edges and e not in loops
            ]
            if 1 < len(internal) < state.graph.edge_count:
                probes.append(internal)
            best_probe = None
            for drop in probes:
                if len(drop) >= state.graph.edge_count:
                    continue
                cand_state = _contract_state(state, drop)
                lv = cand_state.lengths.copy()
                if cand_state.graph.edge_count >= 3:
                    for _v, _kind, group in symmetrizable_groups(cand_state.graph):
                        lv[list(group)] = lv[list(group)].mean()
                cand_state.lengths = lv / lv.sum()
                cand_gap, cand_mult = _gap(cand_state.metric())
                if cand_gap > gap + opts.improve_tol and (
                    best_probe is None or cand_gap > best_probe[1]
                ):
                    best_probe = (cand_state, cand_gap, cand_mult)
            if best_probe is not None:
                state = best_probe[0]
                gap, mult = best_probe[1], best_probe[2]
                trace.append(TraceStep(gap, 0.0, "contract-probe"))
                moved = True

        # pin bookkeeping and boundary contraction; contraction is evaluated
        # together with the symmetrization of any groups it creates, which
        # often lands exactly on the closed-form supremizer
        at_floor = state.lengths <= opts.l_min * (1 + 1e-9)
        state.pin_count[at_floor] += 1
        state.pin_count[~at_floor] = 0
        to_zero = [int(e) for e in np.nonzero(state.pin_count >= opts.pin_iters)[0]]
        if to_zero and len(to_zero) < state.graph.edge_count:
            cand_state = _contract_state(state, to_zero)
            lv = cand_state.lengths.copy()
            if cand_state.graph.edge_count >= 3:
                for _v, _kind, group in symmetrizable_groups(cand_state.graph):
                    lv[list(group)] = lv[list(group)].mean()
            cand_state.lengths = lv / lv.sum()
            cand_gap, cand_mult = _gap(cand_state.metric())
            if cand_gap >= gap - GAP_SLACK:
                state = cand_state
                gap, mult = cand_gap, cand_mult
                trace.append(TraceStep(gap, 0.0, "contract"))
                moved = True
            else:
                state.pin_count[to_zero] = -10 * opts.pin_iters  # back off

        pin_pending = bool(
            np.any((state.pin_count > 0) & (state.pin_count < opts.pin_iters))
        )
        if not moved and not pin_pending:
            break

    return state, gap


def maximize_gap(
    g: DiscreteGraph, init: LengthVector, options: MaximizeOptions | None = None
) -> OptimizationResult:
    """Search for the maximal spectral gap over the closed length simplex.

    Runs the ascent from the given lengths and from random restarts,
    reducing by best gap; the result's lengths live on the original edge
    index set with zeros for contracted edges.
    """
    opts = options or MaximizeOptions()
    if init.size != g.edge_count:
        raise InvalidInputError("init lengths do not match the graph")
    rng = np.random.default_rng(opts.seed)

    starts: list[_AscentState] = []
    if init.zero_edges():
        # honor a boundary start by contracting it first
        mg0, _, edge_map0 = contract_with_maps(g, init)
        starts.append(_AscentState(mg0.graph, mg0.lengths.copy(), list(edge_map0)))
    else:
        starts.append(_AscentState(g, init.values.copy(), list(range(g.edge_count))))
    for _ in range(opts.seeds):
        lv = families.random_lengths(rng, g.edge_count, l_min=2 * opts.l_min).values
        starts.append(_AscentState(g, lv, list(range(g.edge_count))))

    def run(start: _AscentState) -> tuple[float, _AscentState, list[TraceStep]]:
        trace: list[TraceStep] = []
        state, gap = _single_ascent(start, opts, trace)
        return gap, state, trace

    best: tuple[float, _AscentState, list[TraceStep]] | None = None
    for gap, state, trace in parallel_map(run, starts):
        if best is None or gap > best[0] + 1e-12:
            best = (gap, state, trace)

    gap, state, trace = best
    lengths = state.original_lengths(g.edge_count)
    classification = "maximizer-candidate" if lengths.is_interior() else "supremizer-candidate"
    return OptimizationResult(lengths, gap, classification, tuple(trace))


# ---------------------------------------------------------------------------
# infimization: constructive boundary realizations
# ---------------------------------------------------------------------------


def infimize_gap(g: DiscreteGraph) -> OptimizationResult:
    """Realize the infimal gap: unit interval (pi) on a bridge, else a circle (2 pi).

    With a bridge, all length goes onto the lowest-indexed bridge and both
    sides contract to its endpoints.  Bridgeless graphs contract a
    spanning set: one non-tree edge keeps length one and closes into a
    single cycle, the shortest symmetric necklace.
    """
    bridges = find_bridges(g)
    values = np.zeros(g.edge_count)
    if bridges:
        values[min(bridges)] = 1.0
        expected = math.pi
    else:
        # spanning tree via BFS over lowest edge ids
        in_tree = [False] * g.edge_count
        seen = [False] * g.vertex_count
        seen[0] = True
        frontier = [0]
        while frontier:
            v = frontier.pop(0)
            for e, (a, b) in enumerate(g.edges):
                if a == b:
                    continue
                if a == v and not seen[b]:
                    seen[b] = in_tree[e] = True
                    frontier.append(b)
                elif b == v and not seen[a]:
                    seen[a] = in_tree[e] = True
                    frontier.append(a)
        non_tree = [e for e in range(g.edge_count) if not in_tree[e]]
        values[non_tree[0]] = 1.0
        expected = 2 * math.pi

    lengths = LengthVector(values)
    mg, _, _ = contract_with_maps(g, lengths)
    gap, _ = spectral_gap(mg)
    if abs(gap - expected) > 1e-8:
        raise InvalidInputError(
            f"infimizer realization gap {gap} differs from the closed form {expected}"
        )
    trace = (TraceStep(gap, 0.0, "construct"),)
    return OptimizationResult(lengths, gap, "infimizer", trace)


# ---------------------------------------------------------------------------
# brute force over a simplex grid
# ---------------------------------------------------------------------------


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def brute_force_gap(g: DiscreteGraph, resolution: int, mode: str = "max") -> OptimizationResult:
    """Exhaustive scan of the simplex grid { c / resolution }; small instances only."""
    if mode not in ("max", "min"):
        raise InvalidInputError("mode must be 'max' or 'min'")
    E = g.edge_count
    if E > 5 or resolution > 40:
        raise ResourceBudgetError("brute force supports E <= 5 and resolution <= 40")
    n_points = math.comb(resolution + E - 1, E - 1)
    if n_points > 300_000:
        raise ResourceBudgetError(f"grid of {n_points} points exceeds the budget")

    best_gap = None
    best_lengths = None
    sign = 1.0 if mode == "max" else -1.0
    for comp in _compositions(resolution, E):
        lengths = LengthVector(np.array(comp, dtype=float) / resolution)
        try:
            mg, _, _ = contract_with_maps(g, lengths)
        except Exception:
            continue
        gap, _ = spectral_gap(mg)
        if best_gap is None or sign * gap > sign * best_gap + 1e-12:
            best_gap = gap
            best_lengths = lengths
    assert best_gap is not None and best_lengths is not None
    label = "maximizer" if mode == "max" else "minimizer"
    classification = f"{label}-candidate" if best_lengths.is_interior() else (
        "supremizer-candidate" if mode == "max" else "infimizer-candidate"
    )
    trace = (TraceStep(best_gap, 0.0, f"brute-{mode}"),)
    return OptimizationResult(best_lengths, best_gap, classification, trace)
