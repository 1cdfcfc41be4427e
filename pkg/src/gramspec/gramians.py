"""Spectral decompositions of the controllability Gramian over the system
eigenvalues: infinite and finite horizon, simple and multiple spectra,
companion and original coordinates, arbitrary initial conditions.

Sign convention.  The raw eigen-indexed component of the algebraic solution is

    P_hat_i = x_i x_i^T J / (-N'(lambda_i) N(-lambda_i)),

with J = diag(-1, +1, ..., (-1)^n).  The minus sign in the denominator is
pinned by the scalar system xdot = -x + u, whose Gramian is P = 1/2, and is
enforced globally by the Lyapunov-residual checks in the test suite.

Matrix exponentials inside these formulas are evaluated spectrally (residue
expansion for simple spectra, resolvent coefficients for multiple ones); the
independent scaling-and-squaring path lives in the oracle module and shares
no code with this one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .companion import (
    CompanionRealization,
    JordanChainSet,
    LtiSystem,
    alternating_signs,
    controllability_matrix,
    eigen_structure,
    hankel_upper,
    jordan_chains_companion,
    residue_companion,
)
from .errors import ControllabilityError, MultipleEigenvalueError, SolvabilityError
from .spectrum import (
    DEFAULT_TOLERANCES,
    Polynomial,
    Spectrum,
    char_poly,
    check_solvability,
    eval_with_derivative,
)


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def merge_conjugate_components(components: dict, spectrum, kind: str, tol: float = 1e-9) -> dict:
    """Sum components over conjugate index orbits, returning real matrices.

    Keys are the orbit representatives (smallest member).  Raises if an orbit
    sum keeps a non-negligible imaginary part, which means the spectrum was
    not conjugate closed.
    """
    if spectrum is None:
        raise ValueError("conjugate merging needs the source spectrum")
    partner = spectrum.conjugate_partner()

    def orbit(key):
        if kind == "eigen":
            mate = int(partner[key])
            return [key] if mate == key else sorted({key, mate})
        i, j = key
        mate = (int(partner[i]), int(partner[j]))
        return [key] if mate == key else sorted({key, mate})

    merged = {}
    seen = set()
    for key in components:
        members = orbit(key)
        canon = members[0]
        if canon in seen:
            continue
        seen.add(canon)
        total = sum(components[k] for k in members)
        scale = max(1e-300, float(np.max(np.abs(total))))
        if np.max(np.abs(total.imag)) > tol * scale:
            raise ValueError(
                "conjugate-orbit sum has a non-negligible imaginary part; "
                "spectrum is not conjugate closed"
            )
        merged[canon] = total.real
    return merged


def require_solvable(spec: Spectrum, tol: float = DEFAULT_TOLERANCES.solvability):
    report = check_solvability(spec, tol)
    if not report.ok:
        raise SolvabilityError(report)


def _require_simple(spec: Spectrum):
    if not spec.is_simple:
        raise MultipleEigenvalueError(
            "spectrum has multiple eigenvalues; use the multiple-eigenvalue "
            "decomposition (multiple_eig_gramian / inverse_multiple_eig)"
        )


@dataclass(frozen=True)
class SpectralComponentSet:
    """Eigen- or pair-indexed spectral components of a Gramian.

    ``components`` maps an eigen index i (or an index pair (i, j)) to a
    complex n x n matrix.  Raw components preserve orthogonality relations;
    symmetrized components are the Hermitian parts and carry the physical
    interpretation.  ``accurate_total`` (set by extended-precision
    construction) is the component sum accumulated before rounding; near
    degeneracy makes resummation of the stored components lossier.
    """

    components: dict
    kind: str  # 'eigen' | 'pair'
    flavor: str = "raw"  # 'raw' | 'symmetrized'
    coordinate: str = "companion"  # 'companion' | 'original'
    poly: Polynomial | None = None
    spectrum: Spectrum | None = None
    accurate_total: np.ndarray | None = None

    def symmetrized(self) -> "SpectralComponentSet":
        if self.flavor == "symmetrized":
            return self
        parts = {k: hermitian_part(v) for k, v in self.components.items()}
        total = None if self.accurate_total is None else hermitian_part(self.accurate_total)
        return replace(self, components=parts, flavor="symmetrized", accurate_total=total)

    def total(self) -> np.ndarray:
        if self.accurate_total is not None:
            return self.accurate_total
        return sum(self.components.values())

    def merged_real(self, tol: float = 1e-9) -> "SpectralComponentSet":
        """Aggregate conjugate index pairs into real matrices.

        For a real system with a conjugate-closed spectrum the sum over each
        conjugate orbit is real; the residual imaginary part must stay below
        tol relative to the entry scale.
        """
        merged = merge_conjugate_components(self.components, self.spectrum, self.kind, tol)
        total = None if self.accurate_total is None else self.accurate_total.real
        return replace(self, components=merged, accurate_total=total)


@dataclass(frozen=True)
class InitialCondition:
    """Symmetric initial value P(0) of the differential Lyapunov equation."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"initial condition must be square, got {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-12 * scale:
            raise ValueError("initial condition must be symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ExpTerm:
    """One exponential term: coeff * e^{rate t} * t^power / power! applied to
    e^{A^T t} on the right when matrix_exp is set."""

    coeff: np.ndarray
    rate: complex
    power: int = 0
    matrix_exp: bool = False

    def value(self, t: float, expm_transpose) -> np.ndarray:
        factor = np.exp(self.rate * t) * t**self.power / math.factorial(self.power)
        out = self.coeff * factor
        if self.matrix_exp:
            out = out @ expm_transpose(t)
        return out


@dataclass(frozen=True)
class FiniteGramianDecomposition:
    """Finite-horizon decomposition: static parts plus exponential terms.

    Evaluating at the stored horizon (or any other time) yields the per-index
    matrices of the finite Gramian; everything vanishes at t = 0 for a zero
    initial condition.
    """

    static: SpectralComponentSet
    terms: dict
    t: float
    expm_transpose: Callable[[float], np.ndarray]

    def components(self, t: float | None = None, flavor: str = "raw") -> dict:
        t = self.t if t is None else t
        out = {}
        for key, static_part in self.static.components.items():
            m = static_part + sum(
                term.value(t, self.expm_transpose) for term in self.terms.get(key, [])
            )
            out[key] = hermitian_part(m) if flavor == "symmetrized" else m
        return out

    def total(self, t: float | None = None, flavor: str = "raw") -> np.ndarray:
        return sum(self.components(t, flavor).values())

    def component_set(self, t: float | None = None, flavor: str = "raw") -> SpectralComponentSet:
        return replace(
            self.static,
            components=self.components(t, flavor),
            flavor=flavor,
            accurate_total=None,
        )


_MP_DPS = 40


def _mp_polished_roots(poly: Polynomial, values: np.ndarray):
    """Newton-polish simple roots in arbitrary precision (mpmath numbers).

    Horner evaluation noise at any fixed precision caps the achievable root
    accuracy on ill-conditioned coefficient sets; polishing past it keeps the
    eigenvector identities exact to the working precision downstream.
    """
    from mpmath import mp, mpc, mpf

    coefficients = [mpf(float(c)) for c in poly.coeffs]
    polished = []
    with mp.workdps(_MP_DPS):
        for lam in values:
            z = mpc(lam.real, lam.imag)
            for _ in range(5):
                value = deriv = mpc(0)
                for c in coefficients[::-1]:
                    deriv = deriv * z + value
                    value = value * z + c
                if deriv == 0:
                    break
                z = z - value / deriv
            polished.append(z)
    return polished


def _mp_to_clongdouble(z) -> np.clongdouble:
    # string round-trip: casting through complex128 would lose the digits
    # the polish recovered
    from mpmath import nstr

    return np.clongdouble(np.longdouble(nstr(z.real, 25))) + 1j * np.clongdouble(
        np.longdouble(nstr(z.imag, 25))
    )


def _working_values(spec: Spectrum, extended: bool, poly: Polynomial | None = None) -> np.ndarray:
    """Eigenvalues in the working dtype.

    The extended (80-bit) dtype is for stiff problems: component magnitudes
    can exceed their sum by many orders (near-degenerate spectra) and finite
    Gramians of unstable systems at large t span ranges double precision
    cannot resolve.
    """
    if not extended:
        return spec.values
    if poly is None:
        return spec.values.astype(np.clongdouble)
    return np.array(
        [_mp_to_clongdouble(z) for z in _mp_polished_roots(poly, spec.values)],
        dtype=np.clongdouble,
    )


def _accurate_eigen_total(poly: Polynomial, values: np.ndarray) -> np.ndarray:
    """Sum of the raw eigen components accumulated in arbitrary precision.

    Near-degenerate spectra make individual components exceed their sum by
    many orders of magnitude; a sum of components stored at any fixed
    precision then loses the cancellation, so the total is accumulated before
    rounding.
    """
    from mpmath import mp, mpc, mpf

    n = poly.degree
    coefficients = [mpf(float(c)) for c in poly.coeffs]
    with mp.workdps(_MP_DPS):
        total = [[mpc(0) for _ in range(n)] for _ in range(n)]
        for z in _mp_polished_roots(poly, values):
            value = deriv = mirror = mpc(0)
            for c in coefficients[::-1]:
                deriv = deriv * z + value
                value = value * z + c
                mirror = mirror * (-z) + c
            coefficient = 1 / (-deriv * mirror)
            x = [z**k for k in range(n)]
            for mu in range(n):
                for nu in range(n):
                    total[mu][nu] += coefficient * x[mu] * x[nu] * (-1) ** (nu + 1)
        return np.array(
            [[_mp_to_clongdouble(total[mu][nu]) for nu in range(n)] for mu in range(n)],
            dtype=np.clongdouble,
        )


def _raw_eigenpart(p: Polynomial, lam: complex, signs: np.ndarray) -> np.ndarray:
    _, deriv = eval_with_derivative(p, lam)
    at_mirror, _ = eval_with_derivative(p, -lam)
    x = lam ** np.arange(p.degree, dtype=float)
    return np.outer(x, x) * signs[None, :] / (-deriv * at_mirror)


def _raw_pairpart(p: Polynomial, lam_i: complex, lam_j: complex) -> np.ndarray:
    """Raw pair component -1/(lam_i + conj(lam_j)) x_i x_j^* / (N'_i N'_j*)."""
    n = p.degree
    _, di = eval_with_derivative(p, lam_i)
    _, dj = eval_with_derivative(p, np.conj(lam_j))
    x_i = lam_i ** np.arange(n, dtype=float)
    x_j = lam_j ** np.arange(n, dtype=float)
    s = lam_i + np.conj(lam_j)
    return -np.outer(x_i, np.conj(x_j)) / (s * di * dj)


def _expm_transpose_simple(lams: np.ndarray, residues) -> Callable:
    """e^{A_C^T t} by residue expansion, sum_j R_j^T e^{lambda_j t}."""

    def evaluate(t: float) -> np.ndarray:
        return sum(np.exp(lam * t) * r.T for lam, r in zip(lams, residues))

    return evaluate


def infinite_subgramians(
    cr: CompanionRealization,
    spec: Spectrum,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
    extended: bool = False,
) -> SpectralComponentSet:
    """Eigen-indexed decomposition of the algebraic Lyapunov solution.

    Returns the raw components P_hat_i; their Hermitian parts (via
    ``symmetrized()``) sum to the same solution.  ``extended`` builds the
    components in 80-bit precision from re-polished eigenvalues, which keeps
    the cancellation in the sum resolvable when the spectrum is nearly
    degenerate.
    """
    require_solvable(spec, solvability_tol)
    _require_simple(spec)
    signs = alternating_signs(cr.n)
    lams = _working_values(spec, extended, cr.poly)
    parts = {i: _raw_eigenpart(cr.poly, lam, signs) for i, lam in enumerate(lams)}
    total = _accurate_eigen_total(cr.poly, spec.values) if extended else None
    return SpectralComponentSet(parts, "eigen", "raw", "companion", cr.poly, spec, total)


def infinite_pair_subgramians(
    cr: CompanionRealization,
    spec: Spectrum,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
    extended: bool = False,
) -> SpectralComponentSet:
    """Pair-indexed decomposition; row sums reproduce the eigen components."""
    require_solvable(spec, solvability_tol)
    _require_simple(spec)
    lams = _working_values(spec, extended, cr.poly)
    parts = {
        (i, j): _raw_pairpart(cr.poly, lam_i, lam_j)
        for i, lam_i in enumerate(lams)
        for j, lam_j in enumerate(lams)
    }
    return SpectralComponentSet(parts, "pair", "raw", "companion", cr.poly, spec)


def finite_subgramians(
    cr: CompanionRealization,
    spec: Spectrum,
    t: float,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
    extended: bool = False,
) -> FiniteGramianDecomposition:
    """Eigen-indexed decomposition of the finite Gramian with P(0) = 0.

    Component i evaluates to P_hat_i (I - e^{(lambda_i I + A_C^T) t}).
    With ``extended`` everything is built and evaluated in 80-bit precision,
    which the product identity with the finite inverse needs at stiff
    horizons.
    """
    if not (np.isfinite(t) and t >= 0.0):
        raise ValueError(f"horizon must be finite and nonnegative, got {t}")
    require_solvable(spec, solvability_tol)
    _require_simple(spec)
    lams = _working_values(spec, extended, cr.poly)
    signs = alternating_signs(cr.n)
    parts = {i: _raw_eigenpart(cr.poly, lam, signs) for i, lam in enumerate(lams)}
    static = SpectralComponentSet(parts, "eigen", "raw", "companion", cr.poly, spec)
    residues = [residue_companion(lam, cr.poly) for lam in lams]
    terms = {
        i: [ExpTerm(-parts[i], lam, matrix_exp=True)] for i, lam in enumerate(lams)
    }
    return FiniteGramianDecomposition(static, terms, t, _expm_transpose_simple(lams, residues))


def finite_pair_subgramians(
    cr: CompanionRealization,
    spec: Spectrum,
    t: float,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
) -> FiniteGramianDecomposition:
    """Pair-indexed finite decomposition; component (i, j) evaluates to
    (e^{(lambda_i + conj(lambda_j)) t} - 1)/(lambda_i + conj(lambda_j)) times
    the pair numerator, i.e. P_hat_ij (1 - e^{st})."""
    if not (np.isfinite(t) and t >= 0.0):
        raise ValueError(f"horizon must be finite and nonnegative, got {t}")
    static = infinite_pair_subgramians(cr, spec, solvability_tol)
    terms = {}
    for (i, j), part in static.components.items():
        rate = spec.values[i] + np.conj(spec.values[j])
        terms[(i, j)] = [ExpTerm(-part, rate)]
    return FiniteGramianDecomposition(static, terms, t, lambda t: None)


def homogeneous_decomposition(
    cr: CompanionRealization,
    spec: Spectrum,
    p0: InitialCondition,
    t: float,
):
    """Decompositions of the homogeneous solution with P(0) = P_0.

    Returns (eigen_set, pair_set) evaluated at t: components
    R_i P_0 e^{(lambda_i I + A_C^T) t} and R_i P_0 R_j^* e^{(lambda_i +
    conj(lambda_j)) t}; both sums reproduce P_0 at t = 0.
    """
    _require_simple(spec)
    if p0.n != cr.n:
        raise ValueError("initial condition dimension does not match the system")
    residues = eigen_structure(cr.poly, spec).residues
    expm_t = _expm_transpose_simple(spec.values, residues)(t)
    lams = spec.values
    eigen_parts = {
        i: residues[i] @ p0.matrix @ expm_t * np.exp(lams[i] * t) for i in range(lams.size)
    }
    pair_parts = {
        (i, j): residues[i]
        @ p0.matrix
        @ residues[j].conj().T
        * np.exp((lams[i] + np.conj(lams[j])) * t)
        for i in range(lams.size)
        for j in range(lams.size)
    }
    eigen_set = SpectralComponentSet(eigen_parts, "eigen", "raw", "companion", cr.poly, spec)
    pair_set = SpectralComponentSet(pair_parts, "pair", "raw", "companion", cr.poly, spec)
    return eigen_set, pair_set


def lift_to_original(
    decomp: SpectralComponentSet, sys: LtiSystem, poly_tol: float = 1e-8
) -> SpectralComponentSet:
    """Map companion-coordinate components to the original basis.

    Each component X becomes C (H_u X H_u (x) I_m) C^T with C the
    controllability matrix; for single-input systems this equals T X T^T.
    """
    if decomp.coordinate != "companion":
        raise ValueError("decomposition is not in companion coordinates")
    pc = char_poly(sys.a)
    if decomp.poly is not None:
        scale = np.max(np.abs(decomp.poly.coeffs))
        if np.max(np.abs(pc.coeffs - decomp.poly.coeffs)) > poly_tol * scale:
            raise ValueError(
                "characteristic polynomial of the system does not match the decomposition"
            )
    ctrb = controllability_matrix(sys)
    svals = np.linalg.svd(ctrb, compute_uv=False)
    if svals[-1] == 0.0 or svals[0] / svals[-1] > 1e12:
        cond = np.inf if svals[-1] == 0.0 else float(svals[0] / svals[-1])
        raise ControllabilityError("controllability matrix is rank deficient", condition=cond)
    h_u = hankel_upper(pc)
    eye_m = np.eye(sys.m)

    def sandwich(x):
        return ctrb @ np.kron(h_u @ x @ h_u, eye_m) @ ctrb.T

    lifted = {key: sandwich(x) for key, x in decomp.components.items()}
    total = None if decomp.accurate_total is None else sandwich(decomp.accurate_total)
    return replace(decomp, components=lifted, coordinate="original", accurate_total=total)


def resolvent_coefficients(chains: JordanChainSet) -> list:
    """Partial-fraction coefficients of the resolvent from Jordan chains.

    For block i, coefficient k (1-based) is sum_l x_l (y_{k-1+l})^T over the
    chain vectors; for a simple eigenvalue this is the residue R_i.
    """
    out = []
    for block in chains.blocks:
        ni = block.multiplicity
        coeffs = []
        for k in range(1, ni + 1):
            a_k = np.zeros((chains.modal.shape[0],) * 2, dtype=complex)
            for l in range(ni + 1 - k):
                a_k += np.outer(block.right[:, l], block.left[k - 1 + l, :])
            coeffs.append(a_k)
        out.append(coeffs)
    return out


def _expm_transpose_chains(chains: JordanChainSet, coeffs: list) -> Callable:
    """e^{A^T t} from the resolvent coefficients:
    e^{A t} = sum_i sum_k A_hat_k^{(i)} e^{lambda_i t} t^{k-1}/(k-1)!."""

    def evaluate(t: float) -> np.ndarray:
        n = chains.modal.shape[0]
        out = np.zeros((n, n), dtype=complex)
        for block, block_coeffs in zip(chains.blocks, coeffs):
            for k, a_k in enumerate(block_coeffs, start=1):
                out += a_k * (np.exp(block.eigenvalue * t) * t ** (k - 1) / math.factorial(k - 1))
        return out.T

    return evaluate


def _is_companion(a: np.ndarray) -> bool:
    n = a.shape[0]
    if n == 1:
        return True
    expected = np.zeros((n - 1, n))
    expected[:, 1:] = np.eye(n - 1)
    return bool(np.array_equal(a[: n - 1, :], expected))


def multiple_eig_gramian(
    a,
    b,
    spec: Spectrum,
    t: float | None = None,
    chains: JordanChainSet | None = None,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
) -> FiniteGramianDecomposition:
    """Eigen-indexed Gramian decomposition for spectra with multiplicities.

    Component i of the algebraic solution is
    sum_k A_hat_k^{(i)} B B^T (-lambda_i I - A^T)^{-k}; the finite-horizon
    terms subtract the polynomial-in-t exponentials.  When ``chains`` is not
    supplied the matrix must be in companion form so the closed-form chains
    apply; otherwise pass chains built for the given system.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    require_solvable(spec, solvability_tol)
    n = a.shape[0]
    if chains is None:
        if not _is_companion(a):
            raise ValueError(
                "matrix is not in companion form; supply Jordan chains explicitly"
            )
        poly = char_poly(a)
        chains = jordan_chains_companion(spec, poly)
        coordinate = "companion"
        poly_meta = poly
    else:
        coordinate = "companion" if _is_companion(a) else "original"
        poly_meta = None
    coeffs = resolvent_coefficients(chains)

    bbt = b @ b.T
    statics = {}
    terms = {}
    for i, (block, block_coeffs) in enumerate(zip(chains.blocks, coeffs)):
        lam = block.eigenvalue
        inv = np.linalg.inv(-lam * np.eye(n) - a.T.astype(complex))
        rights = []  # B B^T (-lambda I - A^T)^{-k}, k = 1..n_i
        g = bbt.astype(complex)
        for _ in range(block.multiplicity):
            g = g @ inv
            rights.append(g)
        statics[i] = sum(
            a_k @ rights[k] for k, a_k in enumerate(block_coeffs)
        )
        term_list = []
        for k, a_k in enumerate(block_coeffs, start=1):
            for l in range(1, k + 1):
                term_list.append(
                    ExpTerm(-(a_k @ rights[l - 1]), lam, power=k - l, matrix_exp=True)
                )
        terms[i] = term_list

    static_set = SpectralComponentSet(
        statics, "eigen", "raw", coordinate, poly_meta, spec
    )
    horizon = 0.0 if t is None else float(t)
    if t is not None and not (np.isfinite(horizon) and horizon >= 0.0):
        raise ValueError(f"horizon must be finite and nonnegative, got {t}")
    return FiniteGramianDecomposition(
        static_set, terms if t is not None else {}, horizon,
        _expm_transpose_chains(chains, coeffs),
    )


def exponent_collisions(spec: Spectrum, tol: float = 1e-10) -> list:
    """Pairs of index pairs whose exponents lambda_i + conj(lambda_j) collide.

    Pair components are unique only when all these sums are distinct; the
    decomposition is still valid, so collisions are reported, not rejected.
    """
    lams = spec.values
    scale = tol * (1.0 + spec.radius)
    sums = {}
    for i in range(lams.size):
        for j in range(lams.size):
            sums[(i, j)] = lams[i] + np.conj(lams[j])
    keys = sorted(sums)
    collisions = []
    for a_idx in range(len(keys)):
        for b_idx in range(a_idx + 1, len(keys)):
            ka, kb = keys[a_idx], keys[b_idx]
            if abs(sums[ka] - sums[kb]) <= scale:
                collisions.append((ka, kb))
    return collisions


def zero_plaid_defect(m: np.ndarray, alternation: bool = True):
    """Deviation of a matrix from the zero-plaid Hankel alternating pattern.

    Returns (odd_defect, alternation_defect), both relative to the largest
    entry: zeros at positions with odd 1-based index sum, and on even
    anti-diagonals mu + nu = 2k the entry equals (-1)^(nu-k) times the k-th
    diagonal entry.  The alternation part applies to the Gramian components
    only; the inverse components satisfy just the odd-position zeros.
    """
    m = np.asarray(m)
    n = m.shape[0]
    scale = max(1e-300, float(np.max(np.abs(m))))
    odd = 0.0
    alt = 0.0
    for mu in range(1, n + 1):
        for nu in range(1, n + 1):
            if (mu + nu) % 2 == 1:
                odd = max(odd, abs(m[mu - 1, nu - 1]))
            elif alternation:
                k = (mu + nu) // 2
                expected = (-1.0) ** (nu - k) * m[k - 1, k - 1]
                alt = max(alt, abs(m[mu - 1, nu - 1] - expected))
    return odd / scale, alt / scale
