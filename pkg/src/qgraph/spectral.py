"""Eigenvalues and eigenfunctions via the bond-scattering secular equation.

Every edge contributes two directed bonds; on bond b the solution of
-f'' = k^2 f is a^in e^{-ikx} + a^out e^{ikx}.  Collecting the incoming
amplitudes into a vector a of size 2E, the vertex conditions force
a = U(k) a with the unitary U(k) = e^{ikL} J Sigma(k), where L is the
diagonal of bond lengths, J the bond-reversal permutation and Sigma the
block-diagonal vertex scattering matrix.  Positive eigenvalues are the k
with det(I - U(k)) = 0, located by sweeping log|det(I - U(k))| and
refining its dips; the number of singular values of I - U(k) below a
threshold at the root gives the multiplicity.

Vertex scattering blocks:
    Neumann           2/d - delta_{ee'}
    Dirichlet         -delta_{ee'}
    delta-type        -delta_{ee'} + 2/(d + i alpha/k), alpha = tan(theta/2)

Attractive delta couplings (alpha < 0) create negative eigenvalues; those
are found separately from the real hyperbolic vertex-secular matrix, see
`negative_spectrum`.

The k = 0 eigenvalue of a Neumann graph (constant eigenfunction) is
handled symbolically; U(0) is degenerate and never evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInputError,
    NoEigenspaceError,
    ResourceBudgetError,
)
from .graph import (
    MetricGraph,
    condition_alpha,
    is_dirichlet,
    is_neumann,
)

MULTIPLICITY_SCALE = 1e-7      # singular values below this * 2E count as nullspace
BRACKET_REFINE_WIDTH = 1e-12   # golden-section bracket width in k
MAX_SCAN_POINTS = 2_000_000


# ---------------------------------------------------------------------------
# bond scattering matrix
# ---------------------------------------------------------------------------


class BondScattering:
    """Precomputed bond structure of a metric graph.

    Bonds 0..E-1 run along the stored edge direction, bonds E..2E-1 are
    their reversals; J swaps the two halves.
    """

    def __init__(self, m: MetricGraph) -> None:
        g = m.graph
        E = g.edge_count
        self.m = m
        self.n_bonds = 2 * E
        self.bond_lengths = np.concatenate([m.lengths, m.lengths])
        self.jperm = np.concatenate([np.arange(E, 2 * E), np.arange(0, E)])

        origin = np.empty(2 * E, dtype=int)
        for e, (u, v) in enumerate(g.edges):
            origin[e] = u
            origin[e + E] = v
        self.bond_origin = origin

        deg = g.degrees()
        base = np.zeros((2 * E, 2 * E))
        delta_terms: list[tuple[float, int, np.ndarray]] = []
        for v in range(g.vertex_count):
            bonds = np.nonzero(origin == v)[0]
            d = len(bonds)
            assert d == deg[v]
            cond = m.conditions[v]
            if is_neumann(cond):
                base[np.ix_(bonds, bonds)] += 2.0 / d
                base[bonds, bonds] -= 1.0
            elif is_dirichlet(cond):
                base[bonds, bonds] -= 1.0
            else:
                base[bonds, bonds] -= 1.0
                mask = np.zeros((2 * E, 2 * E))
                mask[np.ix_(bonds, bonds)] = 1.0
                delta_terms.append((condition_alpha(cond), d, mask))
        self.sigma_base = base
        self.delta_terms = delta_terms

    def sigma(self, k: float) -> np.ndarray:
        if not self.delta_terms:
            return self.sigma_base
        out = self.sigma_base.astype(complex)
        for alpha, d, mask in self.delta_terms:
            out = out + (2.0 / (d + 1j * alpha / k)) * mask
        return out

    def U(self, k: float) -> np.ndarray:
        phases = np.exp(1j * k * self.bond_lengths)
        return phases[:, None] * self.sigma(k)[self.jperm, :]

    def U_batch(self, ks: np.ndarray) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        phases = np.exp(1j * ks[:, None] * self.bond_lengths[None, :])
        if not self.delta_terms:
            sig = np.broadcast_to(
                self.sigma_base[self.jperm, :].astype(complex),
                (ks.size, self.n_bonds, self.n_bonds),
            )
        else:
            sig = np.repeat(
                self.sigma_base[None, :, :].astype(complex), ks.size, axis=0
            )
            for alpha, d, mask in self.delta_terms:
                coef = 2.0 / (d + 1j * alpha / ks)
                sig = sig + coef[:, None, None] * mask[None, :, :]
            sig = sig[:, self.jperm, :]
        return phases[:, :, None] * sig

    def singular_values(self, k: float) -> np.ndarray:
        """All singular values of I - U(k), ascending."""
        a = np.eye(self.n_bonds) - self.U(k)
        return np.sort(np.linalg.svd(a, compute_uv=False))

    def smallest_singular(self, k: float) -> float:
        return float(self.singular_values(k)[0])

    def smallest_singular_batch(self, ks: np.ndarray) -> np.ndarray:
        ub = self.U_batch(np.asarray(ks, dtype=float))
        a = np.eye(self.n_bonds)[None, :, :] - ub
        return np.linalg.svd(a, compute_uv=False)[:, -1]

    def log_abs_det(self, k: float) -> float:
        a = np.eye(self.n_bonds) - self.U(k)
        return float(np.linalg.slogdet(a)[1])

    def log_abs_det_batch(self, ks: np.ndarray) -> np.ndarray:
        ub = self.U_batch(np.asarray(ks, dtype=float))
        a = np.eye(self.n_bonds)[None, :, :] - ub
        return np.linalg.slogdet(a)[1]


def secular_value(m: MetricGraph, k: float) -> float:
    """Smallest singular value of I - U(k); zero exactly at eigenvalues."""
    if k <= 0:
        raise InvalidInputError("secular_value needs k > 0; k = 0 is handled symbolically")
    return BondScattering(m).smallest_singular(k)


def secular_values(m: MetricGraph, ks) -> np.ndarray:
    return BondScattering(m).smallest_singular_batch(np.asarray(ks, dtype=float))


# ---------------------------------------------------------------------------
# root search on the positive axis
# ---------------------------------------------------------------------------


def scan_step(m: MetricGraph) -> float:
    """pi / (16 L E): well below the mean eigenvalue spacing pi / L."""
    return math.pi / (16.0 * m.total_length * max(1, m.graph.edge_count))


def _golden_min(f, a: float, b: float, tol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def _local_minima_brackets(ks: np.ndarray, svals: np.ndarray) -> list[tuple[float, float]]:
    brackets = []
    n = ks.size
    for i in range(n):
        left = svals[i - 1] if i > 0 else np.inf
        right = svals[i + 1] if i < n - 1 else np.inf
        if svals[i] <= left and svals[i] <= right:
            a = ks[i - 1] if i > 0 else ks[i]
            b = ks[i + 1] if i < n - 1 else ks[i]
            if b > a:
                brackets.append((float(a), float(b)))
    return brackets


def _null_function_norms(bs: BondScattering, k: float, tau: float) -> list[float]:
    """L2 norms of the functions rebuilt from each near-null amplitude direction.

    Near k = 0 the secular matrix has spurious null vectors whose
    reconstructed function vanishes identically (sin-type cancellations);
    genuine low-lying eigenfunctions are near constant with norm O(1).
    """
    E = bs.n_bonds // 2
    a = np.eye(bs.n_bonds) - bs.U(k)
    _, svals, vh = np.linalg.svd(a)
    sigma = bs.sigma(k)
    norms = []
    lengths = bs.bond_lengths[:E]
    for i in range(bs.n_bonds):
        if svals[i] >= tau:
            continue
        a_in = vh[i].conj()
        a_out = sigma @ a_in
        A = a_in[:E] + a_out[:E]
        B = 1j * (a_out[:E] - a_in[:E])
        total = 0.0
        for e in range(E):
            l = float(lengths[e])
            total += (
                abs(A[e]) ** 2 * _int_cc(k, l)
                + abs(B[e]) ** 2 * _int_ss(k, l)
                + 2.0 * (A[e] * np.conj(B[e])).real * _int_cs(k, l)
            )
        norms.append(total)
    return norms


def _refine_roots(
    bs: BondScattering,
    brackets: list[tuple[float, float]],
    tau: float,
    k_floor: float,
) -> list[tuple[float, int, np.ndarray]]:
    total_length = float(bs.bond_lengths.sum()) / 2.0
    small_k_guard = 0.5 * math.pi / total_length
    norm_floor = 1e-6 * total_length
    roots = []
    for a, b in brackets:
        # refine on log|det|: very short edges put a nearly flat singular
        # branch below every other, which would blur a sigma_min search
        k_star = _golden_min(bs.log_abs_det, max(a, k_floor), b, BRACKET_REFINE_WIDTH)
        svals = bs.singular_values(k_star)
        mult = int(np.count_nonzero(svals < tau))
        if mult >= 1 and k_star < small_k_guard:
            # reject the k -> 0 artifact directions whose function vanishes
            mult = sum(1 for n in _null_function_norms(bs, k_star, tau) if n > norm_floor)
        if mult >= 1:
            roots.append((k_star, mult, svals))
    return roots


def _scan_interval(
    bs: BondScattering,
    k_lo: float,
    k_hi: float,
    dk: float,
    tau: float,
    first_only: bool = False,
    accept_above: float = 0.0,
) -> list[tuple[float, int]]:
    """Eigenvalues in (k_lo, k_hi]: coarse scan, refinement, escalation.

    Roots at or below accept_above are dropped (the k -> 0 constant-mode
    artifact of Neumann graphs).  With first_only, refinement stops at the
    lowest accepted root; its escalation window is still searched for an
    even lower companion.
    """
    if k_hi <= k_lo:
        return []
    n_points = int((k_hi - k_lo) / dk) + 2
    if n_points > MAX_SCAN_POINTS:
        raise ResourceBudgetError("scan range too large for the configured step")
    ks = np.linspace(k_lo, k_hi, n_points)
    logdet = bs.log_abs_det_batch(ks)
    brackets = _local_minima_brackets(ks, logdet)

    l_max = float(bs.bond_lengths.max())
    accepted: list[tuple[float, int]] = []

    def escalate(k_star: float, mult: int, sv: np.ndarray, step: float, depth: int) -> None:
        """Split companion roots hiding within one scan step of k_star.

        The next singular value above the multiplicity cluster bounds how
        close an unresolved companion can be; rescan ever finer until the
        cluster either separates or collapses into the multiplicity count.
        """
        if depth > 3:
            return
        sigma_next = sv[min(mult, sv.size - 1)]
        if sigma_next >= 2.0 * l_max * step:
            return
        a = max(k_lo, k_star - 2.0 * step)
        b = min(k_hi, k_star + 2.0 * step)
        fine = np.linspace(a, b, 513)
        fine_step = (b - a) / 512.0
        fine_ld = bs.log_abs_det_batch(fine)
        for k2, m2, sv2 in _refine_roots(bs, _local_minima_brackets(fine, fine_ld), tau, k_lo):
            if k2 <= accept_above:
                continue
            if all(abs(k2 - k0) > 1e-9 for k0, _ in accepted):
                accepted.append((k2, m2))
            escalate(k2, m2, sv2, fine_step, depth + 1)

    for bracket in brackets:
        for k_star, mult, sv in _refine_roots(bs, [bracket], tau, k_lo):
            if k_star > accept_above and all(abs(k_star - k0) > 1e-9 for k0, _ in accepted):
                accepted.append((k_star, mult))
            escalate(k_star, mult, sv, dk, 1)
        if first_only and accepted:
            break

    accepted.sort()
    merged: list[tuple[float, int]] = []
    for k_star, mult in accepted:
        if merged and abs(k_star - merged[-1][0]) < 1e-9:
            prev_k, prev_m = merged[-1]
            merged[-1] = (min(prev_k, k_star), max(prev_m, mult))
        else:
            merged.append((k_star, mult))
    return merged


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Eigenpair:
    k: float
    multiplicity: int


@dataclass(frozen=True)
class Spectrum:
    """Sorted nonnegative k-eigenvalues with multiplicities."""

    eigenpairs: tuple[Eigenpair, ...]

    def ks(self) -> list[float]:
        return [p.k for p in self.eigenpairs]

    def expanded(self, n_max: int | None = None) -> list[float]:
        out: list[float] = []
        for p in self.eigenpairs:
            out.extend([p.k] * p.multiplicity)
            if n_max is not None and len(out) >= n_max:
                return out[:n_max]
        return out

    @property
    def gap(self) -> float:
        for p in self.eigenpairs:
            if p.k > 1e-12:
                return p.k
        raise NoEigenspaceError("no positive eigenvalue in the computed range")

    def multiplicity_of(self, k: float, tol: float = 1e-8) -> int:
        return sum(p.multiplicity for p in self.eigenpairs if abs(p.k - k) <= tol)


def _neumann_floor(m: MetricGraph) -> float:
    # Neumann graphs have no eigenvalue in (0, pi/L); anything detected far
    # below that is the k -> 0 artifact of the constant function.
    return 0.45 * math.pi / m.total_length if m.is_neumann_graph() else 0.0


def eigenvalues(m: MetricGraph, k_max: float, k_min: float = 0.0) -> Spectrum:
    """All eigenvalues in (k_min, k_max], prepending k = 0 for Neumann graphs."""
    if k_max <= 0:
        raise InvalidInputError("k_max must be positive")
    bs = BondScattering(m)
    dk = scan_step(m)
    tau = MULTIPLICITY_SCALE * bs.n_bonds
    k_eps = max(k_min, 1e-6 * dk)
    floor = max(_neumann_floor(m), k_min)
    roots = _scan_interval(bs, k_eps, k_max, dk, tau, accept_above=floor)
    pairs = [Eigenpair(k, mult) for k, mult in roots]
    if m.is_neumann_graph() and k_min == 0.0:
        pairs.insert(0, Eigenpair(0.0, 1))
    return Spectrum(tuple(pairs))


def gap_upper_bound(m: MetricGraph) -> float:
    """Safe scan cap: pi E / L (equilateral flower) plus 2 pi / L for the circle."""
    return math.pi * (m.graph.edge_count + 2) / m.total_length


def spectral_gap(m: MetricGraph) -> tuple[float, int]:
    """Smallest positive eigenvalue and its multiplicity.

    Scans upward in windows until the first root; bounded by the universal
    gap bound.
    """
    bs = BondScattering(m)
    dk = scan_step(m)
    tau = MULTIPLICITY_SCALE * bs.n_bonds
    floor = _neumann_floor(m)
    k_cap = gap_upper_bound(m) + 2.0 * dk
    window = max(256 * dk, math.pi / m.total_length)
    k_lo = 1e-6 * dk
    while True:
        k_hi = min(k_lo + window, k_cap)
        roots = _scan_interval(bs, k_lo, k_hi, dk, tau, first_only=True, accept_above=floor)
        if roots:
            return roots[0]
        if k_hi >= k_cap:
            raise NoEigenspaceError("no eigenvalue found below the universal bound")
        # overlap windows so boundary minima are never split
        k_lo = k_hi - 2.0 * dk


# ---------------------------------------------------------------------------
# eigenfunctions: real trigonometric form per edge
# ---------------------------------------------------------------------------


def _int_cc(k: float, l: float) -> float:
    if k == 0.0:
        return l
    return l / 2.0 + math.sin(2.0 * k * l) / (4.0 * k)


def _int_ss(k: float, l: float) -> float:
    if k == 0.0:
        return 0.0
    return l / 2.0 - math.sin(2.0 * k * l) / (4.0 * k)


def _int_cs(k: float, l: float) -> float:
    if k == 0.0:
        return 0.0
    return math.sin(k * l) ** 2 / (2.0 * k)


@dataclass(frozen=True)
class EdgeTrig:
    """Real function A_e cos(kx) + B_e sin(kx) on each edge (x along the edge)."""

    k: float
    amp_cos: tuple[float, ...]
    amp_sin: tuple[float, ...]

    def value(self, e: int, x: float) -> float:
        return self.amp_cos[e] * math.cos(self.k * x) + self.amp_sin[e] * math.sin(self.k * x)

    def derivative(self, e: int, x: float) -> float:
        return self.k * (
            -self.amp_cos[e] * math.sin(self.k * x) + self.amp_sin[e] * math.cos(self.k * x)
        )

    def end_value(self, e: int, end: int, lengths: np.ndarray) -> float:
        return self.value(e, 0.0 if end == 0 else float(lengths[e]))

    def outgoing_derivative(self, e: int, end: int, lengths: np.ndarray) -> float:
        """Derivative pointing from the vertex into the edge."""
        if end == 0:
            return self.derivative(e, 0.0)
        return -self.derivative(e, float(lengths[e]))

    def vertex_value(self, m: MetricGraph, v: int) -> float:
        ends = m.graph.incident_ends(v)
        return self.end_value(*ends[0], m.lengths)

    def norm_sq(self, lengths: np.ndarray) -> float:
        total = 0.0
        for e, l in enumerate(lengths):
            a, b = self.amp_cos[e], self.amp_sin[e]
            total += (
                a * a * _int_cc(self.k, l)
                + b * b * _int_ss(self.k, l)
                + 2.0 * a * b * _int_cs(self.k, l)
            )
        return total

    def inner(self, other: "EdgeTrig", lengths: np.ndarray) -> float:
        total = 0.0
        for e, l in enumerate(lengths):
            a1, b1 = self.amp_cos[e], self.amp_sin[e]
            a2, b2 = other.amp_cos[e], other.amp_sin[e]
            total += (
                a1 * a2 * _int_cc(self.k, l)
                + (a1 * b2 + b1 * a2) * _int_cs(self.k, l)
                + b1 * b2 * _int_ss(self.k, l)
            )
        return total

    def energies(self) -> np.ndarray:
        """Per-edge f'^2 + k^2 f^2 (constant along each edge)."""
        a = np.asarray(self.amp_cos)
        b = np.asarray(self.amp_sin)
        return self.k**2 * (a * a + b * b)

    def max_abs(self, lengths: np.ndarray) -> float:
        best = 0.0
        for e, l in enumerate(lengths):
            l = float(l)
            a, b = self.amp_cos[e], self.amp_sin[e]
            best = max(best, abs(self.value(e, 0.0)), abs(self.value(e, l)))
            if self.k > 0:
                # interior extrema of R cos(kx - phi) sit at kx - phi = m pi
                phi = math.atan2(b, a)
                m_lo = math.ceil(-phi / math.pi)
                m_hi = math.floor((self.k * l - phi) / math.pi)
                if m_hi >= m_lo:
                    best = max(best, math.hypot(a, b))
        return best

    def sample(self, e: int, length: float, n: int) -> tuple[np.ndarray, np.ndarray]:
        xs = np.linspace(0.0, length, n)
        vals = self.amp_cos[e] * np.cos(self.k * xs) + self.amp_sin[e] * np.sin(self.k * xs)
        return xs, vals

    def bond_amplitudes(self, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Complex (a_in, a_out) over the 2E directed bonds.

        Forward bonds carry a_in = (A + iB)/2 and a_out = (A - iB)/2; the
        reversed-bond amplitudes follow from a_in(rev) = e^{ikl} a_out.
        """
        A = np.asarray(self.amp_cos, dtype=complex)
        B = np.asarray(self.amp_sin, dtype=complex)
        fwd_in = (A + 1j * B) / 2.0
        fwd_out = (A - 1j * B) / 2.0
        phase = np.exp(1j * self.k * np.asarray(lengths))
        rev_in = phase * fwd_out
        rev_out = np.conj(phase) * fwd_in
        return np.concatenate([fwd_in, rev_in]), np.concatenate([fwd_out, rev_out])


def constant_eigenfunction(m: MetricGraph) -> EdgeTrig:
    c = 1.0 / math.sqrt(m.total_length)
    E = m.graph.edge_count
    return EdgeTrig(0.0, (c,) * E, (0.0,) * E)


def eigenfunction(m: MetricGraph, k: float) -> list[EdgeTrig]:
    """Orthonormal real basis of the eigenspace at k.

    Raises NoEigenspaceError when k is not an eigenvalue at the solver's
    multiplicity threshold.
    """
    if abs(k) <= 1e-12:
        if not m.is_neumann_graph():
            raise NoEigenspaceError("k = 0 is only an eigenvalue of Neumann graphs")
        return [constant_eigenfunction(m)]
    bs = BondScattering(m)
    tau = MULTIPLICITY_SCALE * bs.n_bonds
    a = np.eye(bs.n_bonds) - bs.U(k)
    _, svals, vh = np.linalg.svd(a)
    null = [vh[i].conj() for i in range(bs.n_bonds) if svals[i] < tau]
    if not null:
        raise NoEigenspaceError(f"k = {k} is not an eigenvalue (sigma_min = {svals[-1]:.3e})")

    E = m.graph.edge_count
    sigma = bs.sigma(k)
    candidates: list[tuple[np.ndarray, np.ndarray]] = []
    for a_in in null:
        a_out = sigma @ a_in
        fwd_in, fwd_out = a_in[:E], a_out[:E]
        candidates.append((np.real(fwd_in + fwd_out), np.imag(fwd_in - fwd_out)))
        candidates.append((np.imag(fwd_in + fwd_out), np.real(fwd_out - fwd_in)))

    trigs = [EdgeTrig(k, tuple(A), tuple(B)) for A, B in candidates]
    gram = np.array([[t1.inner(t2, m.lengths) for t2 in trigs] for t1 in trigs])
    evals, evecs = np.linalg.eigh(gram)
    keep = evals > 1e-8 * max(evals.max(), 1e-300)
    basis: list[EdgeTrig] = []
    for lam, vec in zip(evals[keep], evecs[:, keep].T):
        A = sum(c * np.asarray(t.amp_cos) for c, t in zip(vec, trigs)) / math.sqrt(lam)
        B = sum(c * np.asarray(t.amp_sin) for c, t in zip(vec, trigs)) / math.sqrt(lam)
        coeffs = np.concatenate([A, B])
        lead = coeffs[np.argmax(np.abs(coeffs))]
        if lead < 0:
            A, B = -A, -B
        basis.append(EdgeTrig(k, tuple(A), tuple(B)))
    return basis


def vertex_condition_residual(m: MetricGraph, f: EdgeTrig) -> float:
    """Worst violation of the vertex conditions, scaled for unit-norm f."""
    worst = 0.0
    for v in range(m.graph.vertex_count):
        ends = m.graph.incident_ends(v)
        values = [f.end_value(e, end, m.lengths) for e, end in ends]
        derivs = [f.outgoing_derivative(e, end, m.lengths) for e, end in ends]
        cond = m.conditions[v]
        if is_dirichlet(cond):
            worst = max(worst, max(abs(x) for x in values))
            continue
        worst = max(worst, max(values) - min(values))
        alpha = condition_alpha(cond)
        scale = max(1.0, abs(f.k))
        worst = max(worst, abs(sum(derivs) - alpha * values[0]) / scale)
    return worst


# ---------------------------------------------------------------------------
# piecewise trigonometric test functions and Rayleigh quotients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrigPiece:
    """amp_cos cos(freq (x - x0)) + amp_sin sin(freq (x - x0)) + offset on [x0, x1]."""

    x0: float
    x1: float
    amp_cos: float
    amp_sin: float
    freq: float
    offset: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    def value(self, x: float) -> float:
        u = x - self.x0
        if self.freq == 0.0:
            return self.amp_cos + self.offset
        return (
            self.amp_cos * math.cos(self.freq * u)
            + self.amp_sin * math.sin(self.freq * u)
            + self.offset
        )

    def integral(self) -> float:
        h = self.width
        if self.freq == 0.0:
            return (self.amp_cos + self.offset) * h
        w = self.freq
        return (
            self.amp_cos / w * math.sin(w * h)
            + self.amp_sin / w * (1.0 - math.cos(w * h))
            + self.offset * h
        )

    def integral_sq(self) -> float:
        h = self.width
        if self.freq == 0.0:
            return (self.amp_cos + self.offset) ** 2 * h
        a, b, c, w = self.amp_cos, self.amp_sin, self.offset, self.freq
        osc = a / w * math.sin(w * h) + b / w * (1.0 - math.cos(w * h))
        return (
            a * a * _int_cc(w, h)
            + b * b * _int_ss(w, h)
            + 2.0 * a * b * _int_cs(w, h)
            + 2.0 * c * osc
            + c * c * h
        )

    def integral_deriv_sq(self) -> float:
        h = self.width
        if self.freq == 0.0:
            return 0.0
        a, b, w = self.amp_cos, self.amp_sin, self.freq
        return w * w * (
            a * a * _int_ss(w, h) + b * b * _int_cc(w, h) - 2.0 * a * b * _int_cs(w, h)
        )


@dataclass(frozen=True)
class PiecewiseTrig:
    """Per-edge lists of trig pieces; continuous test functions on the graph."""

    pieces: tuple[tuple[TrigPiece, ...], ...]

    def edge_value(self, e: int, x: float) -> float:
        for piece in self.pieces[e]:
            if piece.x0 - 1e-12 <= x <= piece.x1 + 1e-12:
                return piece.value(x)
        raise InvalidInputError(f"x = {x} outside the pieces of edge {e}")

    def integral(self) -> float:
        return sum(p.integral() for edge in self.pieces for p in edge)

    def norm_sq(self) -> float:
        return sum(p.integral_sq() for edge in self.pieces for p in edge)

    def dirichlet_energy(self) -> float:
        return sum(p.integral_deriv_sq() for edge in self.pieces for p in edge)


def from_eigenfunction(f: EdgeTrig, lengths: np.ndarray) -> PiecewiseTrig:
    pieces = tuple(
        (TrigPiece(0.0, float(l), f.amp_cos[e], f.amp_sin[e], f.k, 0.0),)
        for e, l in enumerate(lengths)
    )
    return PiecewiseTrig(pieces)


def constant_on_edges(lengths: np.ndarray, value: float) -> tuple[tuple[TrigPiece, ...], ...]:
    return tuple((TrigPiece(0.0, float(l), value, 0.0, 0.0, 0.0),) for l in lengths)


def harmonic_interpolant(m: MetricGraph, vertex_values, freq: float) -> PiecewiseTrig:
    """The unique f with f'' + freq^2 f = 0 on edges matching the vertex values.

    Needs freq * l_e < pi on every edge so the interpolation is well posed.
    """
    if freq <= 0.0 or freq * float(m.lengths.max()) >= math.pi:
        raise InvalidInputError("need 0 < freq < pi / max edge length")
    vals = np.asarray(vertex_values, dtype=float)
    pieces = []
    for e, (u, v) in enumerate(m.graph.edges):
        l = float(m.lengths[e])
        a = vals[u]
        b = (vals[v] - vals[u] * math.cos(freq * l)) / math.sin(freq * l)
        pieces.append((TrigPiece(0.0, l, a, b, freq, 0.0),))
    return PiecewiseTrig(tuple(pieces))


def _check_admissible(m: MetricGraph, f: PiecewiseTrig, tol: float = 1e-8) -> None:
    if len(f.pieces) != m.graph.edge_count:
        raise InvalidInputError("test function must cover every edge")
    scale = 0.0
    for e, edge_pieces in enumerate(f.pieces):
        if not edge_pieces:
            raise InvalidInputError(f"edge {e} has no pieces")
        x = 0.0
        for piece in edge_pieces:
            if abs(piece.x0 - x) > 1e-10:
                raise InvalidInputError(f"pieces on edge {e} do not tile [0, l]")
            x = piece.x1
            scale = max(scale, abs(piece.value(piece.x0)), abs(piece.value(piece.x1)))
        if abs(x - float(m.lengths[e])) > 1e-10:
            raise InvalidInputError(f"pieces on edge {e} do not reach the edge length")
        for p1, p2 in zip(edge_pieces, edge_pieces[1:]):
            if abs(p1.value(p1.x1) - p2.value(p2.x0)) > tol * max(scale, 1.0):
                raise InvalidInputError(f"discontinuity inside edge {e}")
    for v in range(m.graph.vertex_count):
        ends = m.graph.incident_ends(v)
        vals = []
        for e, end in ends:
            x = 0.0 if end == 0 else float(m.lengths[e])
            vals.append(f.edge_value(e, x))
        if max(vals) - min(vals) > tol * max(scale, 1.0):
            raise InvalidInputError(f"test function discontinuous at vertex {v}")


def rayleigh(m: MetricGraph, f: PiecewiseTrig) -> float:
    """Rayleigh quotient of a continuous piecewise-trig test function."""
    _check_admissible(m, f)
    denom = f.norm_sq()
    if denom <= 1e-300:
        raise InvalidInputError("test function is zero")
    return f.dirichlet_energy() / denom


def rayleigh_centered(m: MetricGraph, f: PiecewiseTrig) -> float:
    """Rayleigh quotient of f minus its best constant (zero-mean shift)."""
    _check_admissible(m, f)
    mean_sq = f.integral() ** 2 / m.total_length
    denom = f.norm_sq() - mean_sq
    if denom <= 1e-300:
        raise InvalidInputError("test function is constant")
    return f.dirichlet_energy() / denom


# ---------------------------------------------------------------------------
# composite vertex formed by shrinking an edge (contraction limit)
# ---------------------------------------------------------------------------


def composite_reflection(k: float, l_e: float, d1: int, d2: int) -> complex:
    """Reflection amplitude at a composite vertex holding an edge of length l_e.

    Trajectory sum through an edge joining Neumann vertices of degrees d1,
    d2; converges to the merged Neumann entry as l_e -> 0.
    """
    denom = np.exp(-2j * k * l_e) * d1 * d2 - (2 - d1) * (2 - d2)
    return -1.0 + (2.0 / d1) * (1.0 + (4.0 - 2.0 * d2) / denom)


def composite_transmission(k: float, l_e: float, d1: int, d2: int) -> complex:
    denom = np.exp(-1j * k * l_e) * d1 * d2 - np.exp(1j * k * l_e) * (2 - d1) * (2 - d2)
    return 4.0 / denom


def merged_neumann_entry(d1: int, d2: int, diagonal: bool) -> float:
    d = d1 + d2 - 2
    return 2.0 / d - (1.0 if diagonal else 0.0)


# ---------------------------------------------------------------------------
# negative spectrum (attractive delta couplings)
# ---------------------------------------------------------------------------


def _hyperbolic_vertex_matrix(m: MetricGraph, kappa: float, keep: list[int]) -> np.ndarray:
    """Vertex-secular matrix for lambda = -kappa^2; Dirichlet vertices removed."""
    idx = {v: i for i, v in enumerate(keep)}
    n = len(keep)
    M = np.zeros((n, n))
    for e, (u, v) in enumerate(m.graph.edges):
        l = float(m.lengths[e])
        if u == v:
            if u in idx:
                M[idx[u], idx[u]] += 2.0 * kappa * math.tanh(kappa * l / 2.0)
            continue
        x = kappa * l
        coth = kappa / math.tanh(x)
        # sinh overflows near x = 710; beyond that csch is numerically zero
        csch = kappa / math.sinh(x) if x < 700.0 else 2.0 * kappa * math.exp(-x)
        if u in idx:
            M[idx[u], idx[u]] += coth
        if v in idx:
            M[idx[v], idx[v]] += coth
        if u in idx and v in idx:
            M[idx[u], idx[v]] -= csch
            M[idx[v], idx[u]] -= csch
    for v in keep:
        M[idx[v], idx[v]] += condition_alpha(m.conditions[v])
    return M


def _zero_limit_matrix(m: MetricGraph, keep: list[int]) -> np.ndarray:
    """kappa -> 0 limit: weighted graph Laplacian plus the delta couplings."""
    idx = {v: i for i, v in enumerate(keep)}
    n = len(keep)
    M = np.zeros((n, n))
    for e, (u, v) in enumerate(m.graph.edges):
        if u == v:
            continue
        w = 1.0 / float(m.lengths[e])
        if u in idx:
            M[idx[u], idx[u]] += w
        if v in idx:
            M[idx[v], idx[v]] += w
        if u in idx and v in idx:
            M[idx[u], idx[v]] -= w
            M[idx[v], idx[u]] -= w
    for v in keep:
        M[idx[v], idx[v]] += condition_alpha(m.conditions[v])
    return M


def negative_spectrum(m: MetricGraph) -> list[Eigenpair]:
    """Negative-eigenvalue branch, reported as k = -kappa (so lambda = -kappa^2).

    The number of negative eigenvalues equals the number of negative
    eigenvalues of the kappa -> 0 limit matrix; each is then located by
    bisection on the matching (monotone in kappa) eigenvalue branch.
    """
    if all(condition_alpha(c) >= 0 for c in m.conditions if not is_dirichlet(c)):
        return []
    keep = [v for v in range(m.graph.vertex_count) if not is_dirichlet(m.conditions[v])]
    if not keep:
        return []
    M0 = _zero_limit_matrix(m, keep)
    scale = max(float(np.abs(M0).max()), 1.0)
    n_neg = int(np.count_nonzero(np.linalg.eigvalsh(M0) < -1e-12 * scale))
    if n_neg == 0:
        return []

    kappa_lo = 1e-9
    kappa_hi = 1.0
    for _ in range(80):
        evals = np.linalg.eigvalsh(_hyperbolic_vertex_matrix(m, kappa_hi, keep))
        if evals[0] > 0:
            break
        kappa_hi *= 2.0
    roots = []
    for j in range(n_neg):

        def branch(kappa: float, j=j) -> float:
            return float(np.linalg.eigvalsh(_hyperbolic_vertex_matrix(m, kappa, keep))[j])

        lo, hi = kappa_lo, kappa_hi
        if branch(lo) >= 0:
            continue
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if branch(mid) < 0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13 * max(1.0, hi):
                break
        roots.append(-0.5 * (lo + hi))

    roots.sort()
    merged: list[Eigenpair] = []
    for k in roots:
        if merged and abs(k - merged[-1].k) < 1e-9:
            merged[-1] = Eigenpair(merged[-1].k, merged[-1].multiplicity + 1)
        else:
            merged.append(Eigenpair(k, 1))
    return merged
