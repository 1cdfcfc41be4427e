"""Characteristic polynomials, root finding, spectrum clustering, solvability.

Everything downstream works with a monic characteristic polynomial and a
clustered spectrum.  The root finder is a simultaneous-iteration scheme
(Aberth-Ehrlich with a Durand-Kerner fallback), so no general eigensolver is
needed for companion-sized problems (degree up to ~50).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConvergenceError


@dataclass(frozen=True)
class Tolerances:
    """Relative tolerances used by the spectrum pipeline.

    All three scale with the problem (coefficient magnitude or spectral
    radius); see the operations that consume them.
    """

    root: float = 1e-12
    cluster: float = 1e-8
    solvability: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Polynomial:
    """Monic real polynomial, coefficients ascending: a_0 + a_1 s + ... + s^n."""

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 2:
            raise ValueError("polynomial needs degree >= 1 (at least two coefficients)")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("polynomial coefficients must be finite")
        if coeffs[-1] != 1.0:
            raise ValueError(f"polynomial must be monic, got leading coefficient {coeffs[-1]!r}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, s):
        return eval_with_derivative(self, s)[0]


@dataclass(frozen=True)
class Spectrum:
    """Clustered eigenvalues with multiplicities; total multiplicity is n."""

    values: np.ndarray
    multiplicities: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        mults = np.asarray(self.multiplicities, dtype=int)
        if values.ndim != 1 or values.shape != mults.shape:
            raise ValueError("values and multiplicities must be 1-d and equally long")
        if np.any(mults < 1):
            raise ValueError("multiplicities must be positive")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "multiplicities", mults)

    @classmethod
    def simple(cls, values) -> "Spectrum":
        values = np.asarray(values, dtype=complex)
        return cls(values, np.ones(values.size, dtype=int))

    @property
    def n(self) -> int:
        return int(self.multiplicities.sum())

    @property
    def is_simple(self) -> bool:
        return bool(np.all(self.multiplicities == 1))

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.values.real < 0.0))

    def expanded(self) -> np.ndarray:
        """All eigenvalues with repeats, e.g. for rebuilding the polynomial."""
        return np.repeat(self.values, self.multiplicities)

    def conjugate_partner(self, tol: float = 1e-9) -> np.ndarray:
        """Index of the conjugate eigenvalue for each entry (itself if real)."""
        scale = 1.0 + self.radius
        partner = np.empty(self.values.size, dtype=int)
        for i, lam in enumerate(self.values):
            partner[i] = int(np.argmin(np.abs(self.values - np.conj(lam))))
            if abs(self.values[partner[i]] - np.conj(lam)) > tol * scale:
                partner[i] = i
        return partner


@dataclass(frozen=True)
class SolvabilityReport:
    """Outcome of the pairwise check |lambda_i + lambda_j| > 0."""

    ok: bool
    violating_pairs: list = field(default_factory=list)
    min_pair_magnitude: float = np.inf


def _kahan_trace(m: np.ndarray):
    """Compensated summation of the diagonal (dtype-preserving)."""
    zero = m.dtype.type(0.0)
    total = zero
    comp = zero
    for x in np.diagonal(m):
        y = x - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def char_poly(a) -> Polynomial:
    """Monic characteristic polynomial of a square matrix.

    Uses the Faddeev-Leverrier recursion with compensated trace summation;
    returns ascending coefficients (a_0, ..., a_{n-1}, 1).  Intermediate
    matrix powers grow like norm(A)^k, so the recursion runs in 80-bit floats
    to keep the rounded coefficients accurate to better than 1e-12 relative.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"dynamics matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("dynamics matrix must have finite entries")
    n = a.shape[0]
    work = a.astype(np.longdouble)
    coeffs = np.zeros(n + 1, dtype=np.longdouble)
    coeffs[n] = 1.0
    m = np.eye(n, dtype=np.longdouble)
    for k in range(1, n + 1):
        m = work @ m
        c = -_kahan_trace(m) / k
        coeffs[n - k] = c
        m += c * np.eye(n, dtype=np.longdouble)
    return Polynomial(coeffs.astype(float))


def poly_from_roots(roots) -> Polynomial:
    """Monic polynomial with the given roots (ascending coefficients).

    Imaginary residue from conjugate-paired root sets is discarded.
    """
    coeffs = np.array([1.0 + 0.0j])
    for r in np.asarray(roots, dtype=complex):
        coeffs = np.convolve(coeffs, np.array([-r, 1.0]))
    return Polynomial(coeffs.real)


def eval_with_derivative(p: Polynomial, s):
    """Horner evaluation of N(s) and N'(s)."""
    value = 0.0 + 0.0j
    deriv = 0.0 + 0.0j
    for c in p.coeffs[::-1]:
        deriv = deriv * s + value
        value = value * s + c
    return value, deriv


def _root_residual_bound(p: Polynomial, roots, tol: float) -> np.ndarray:
    scale = np.max(np.abs(p.coeffs))
    return tol * scale * np.maximum(1.0, np.abs(roots)) ** p.degree


def _residuals(p: Polynomial, roots) -> np.ndarray:
    return np.abs([eval_with_derivative(p, r)[0] for r in roots])


_STEP_TOL = 1e-14


def _aberth_sweeps(p: Polynomial, roots: np.ndarray, tol: float, max_sweeps: int):
    """Aberth-Ehrlich simultaneous iteration, sequential (Gauss-Seidel) updates.

    Iterates until the corrections stall at roundoff (the residual bound alone
    is a guarantee, not a useful stopping rule: near root clusters the
    polynomial is flat and residuals pass long before the roots settle).
    Multiple-root clouds never reach the step tolerance and simply run out
    the sweep budget, which the final residual check accepts.
    """
    n = roots.size
    for _ in range(max_sweeps):
        max_step = 0.0
        for i in range(n):
            value, deriv = eval_with_derivative(p, roots[i])
            if value == 0.0:
                continue
            if deriv == 0.0:
                roots[i] += 1e-8 * (1.0 + abs(roots[i]))
                value, deriv = eval_with_derivative(p, roots[i])
            w = value / deriv
            others = np.delete(roots, i)
            s = np.sum(1.0 / (roots[i] - others))
            denom = 1.0 - w * s
            if denom == 0.0:
                denom = 1e-16
            step = w / denom
            max_step = max(max_step, abs(step) / (1.0 + abs(roots[i])))
            roots[i] -= step
        if max_step <= _STEP_TOL:
            break
    ok = np.all(_residuals(p, roots) <= _root_residual_bound(p, roots, tol))
    return roots, bool(ok)


def _durand_kerner_sweeps(p: Polynomial, roots: np.ndarray, tol: float, max_sweeps: int):
    n = roots.size
    for _ in range(max_sweeps):
        max_step = 0.0
        for i in range(n):
            value = eval_with_derivative(p, roots[i])[0]
            others = np.delete(roots, i)
            denom = np.prod(roots[i] - others)
            if denom == 0.0:
                denom = 1e-16
            step = value / denom
            max_step = max(max_step, abs(step) / (1.0 + abs(roots[i])))
            roots[i] -= step
        if max_step <= _STEP_TOL:
            break
    ok = np.all(_residuals(p, roots) <= _root_residual_bound(p, roots, tol))
    return roots, bool(ok)


def _initial_circle(p: Polynomial, offset: float) -> np.ndarray:
    n = p.degree
    radius = 1.0 + float(np.max(np.abs(p.coeffs)))
    angles = 2.0 * np.pi * np.arange(n) / n + offset
    return radius * np.exp(1j * angles)


def _pair_conjugates(roots: np.ndarray) -> np.ndarray:
    """Enforce exact conjugate symmetry on an (approximately symmetric) root set.

    Roots are optimally matched against their own conjugates; matched 2-cycles
    are averaged into exact conjugate pairs, fixed points are made real.
    """
    n = roots.size
    cost = np.abs(roots[:, None] - np.conj(roots)[None, :])
    _, col = linear_sum_assignment(cost)
    out = roots.copy()
    visited = np.zeros(n, dtype=bool)
    for i in range(n):
        if visited[i]:
            continue
        j = col[i]
        if j == i:
            out[i] = roots[i].real
            visited[i] = True
        elif col[j] == i:
            z = 0.5 * (roots[i] + np.conj(roots[j]))
            out[i] = z
            out[j] = np.conj(z)
            visited[i] = visited[j] = True
        else:
            visited[i] = True
    return out


def _sort_roots(roots: np.ndarray) -> np.ndarray:
    order = np.lexsort((roots.imag, np.abs(roots.imag), roots.real))
    return roots[order]


def find_roots(p: Polynomial, tol: float = DEFAULT_TOLERANCES.root) -> np.ndarray:
    """All roots of a monic polynomial by simultaneous iteration.

    Every returned root satisfies |N(r)| <= tol * max|a_i| * max(1, |r|)^n.
    Clouds around multiple roots pass this bound (the polynomial is flat
    there); cluster() recovers multiplicities from the cloud.

    Raises ConvergenceError with the worst residual if neither the
    Aberth-Ehrlich nor the Durand-Kerner iteration meets the bound within
    200 sweeps.
    """
    if p.degree == 1:
        return np.array([-p.coeffs[0] + 0.0j])
    roots, ok = _aberth_sweeps(p, _initial_circle(p, 0.4), tol, max_sweeps=200)
    if not ok:
        roots, ok = _durand_kerner_sweeps(p, _initial_circle(p, 1.1), tol, max_sweeps=200)
    if not ok:
        worst = float(np.max(_residuals(p, roots) / _root_residual_bound(p, roots, tol)))
        raise ConvergenceError(
            "root finding did not converge within 200 sweeps", worst_residual=worst
        )
    return _sort_roots(_pair_conjugates(roots))


def cluster(roots, tol: float = DEFAULT_TOLERANCES.cluster) -> Spectrum:
    """Greedy union of roots within tol * (1 + spectral radius).

    Multiplicity is the cluster size and the representative the cluster
    centroid; centroids of conjugate clusters are symmetrized.  Root clouds
    from a multiplicity-m root have radius ~eps^(1/m), so recovering
    multiplicities from floating-point roots needs tol of that order.
    """
    roots = np.asarray(roots, dtype=complex)
    n = roots.size
    radius = tol * (1.0 + float(np.max(np.abs(roots))))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= radius:
                parent[find(i)] = find(j)

    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    values = np.array([np.mean(roots[idx]) for idx in groups.values()])
    mults = np.array([len(idx) for idx in groups.values()])

    values = _pair_conjugates(values)
    order = np.lexsort((values.imag, np.abs(values.imag), values.real))
    return Spectrum(values[order], mults[order])


def check_solvability(
    spec: Spectrum, tol: float = DEFAULT_TOLERANCES.solvability
) -> SolvabilityReport:
    """Check |lambda_i + lambda_j| > tol * (1 + spectral radius) for all i <= j.

    Callers must refuse any Gramian decomposition when the report is not ok.
    """
    scale = tol * (1.0 + spec.radius)
    pairs = []
    min_mag = np.inf
    values = spec.values
    for i in range(values.size):
        for j in range(i, values.size):
            mag = abs(values[i] + values[j])
            min_mag = min(min_mag, mag)
            if mag <= scale:
                pairs.append((i, j))
    return SolvabilityReport(ok=not pairs, violating_pairs=pairs, min_pair_magnitude=float(min_mag))
