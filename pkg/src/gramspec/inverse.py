"""Spectral decompositions of the inverse Gramian: algebraic Riccati
solutions, the differential Riccati solution with its normalization matrix,
and the multiple-eigenvalue generalization.

Inverse components are built directly from left eigenvectors; nothing in this
module numerically inverts a Gramian sum (the numerical inverse exists only
in the oracle module, as an independent check).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .companion import (
    CompanionRealization,
    JordanChainSet,
    LtiSystem,
    alternating_signs,
    build_companion,
    controllability_matrix,
    eigen_structure,
    hankel_upper,
    left_eigenvector,
    residue_companion,
)
from .errors import (
    ConditioningError,
    ControllabilityError,
    MultipleEigenvalueError,
)
from .gramians import (
    InitialCondition,
    SpectralComponentSet,
    _expm_transpose_simple,
    _working_values,
    hermitian_part,
    merge_conjugate_components,
    require_solvable,
)
from .spectrum import (
    DEFAULT_TOLERANCES,
    Polynomial,
    Spectrum,
    char_poly,
    cluster,
    eval_with_derivative,
    find_roots,
)


@dataclass(frozen=True)
class InverseComponentSet:
    """Eigen- or pair-indexed components of the inverse Gramian.

    Raw eigen components are rank one and orthogonal against the Gramian
    eigenparts; the Hermitian parts carry the energy interpretation.
    ``accurate_total`` is the construction-precision component sum set by
    extended-precision construction (see the Gramian counterpart).
    """

    components: dict
    kind: str  # 'eigen' | 'pair'
    flavor: str = "raw"
    coordinate: str = "companion"
    poly: Polynomial | None = None
    spectrum: Spectrum | None = None
    accurate_total: np.ndarray | None = None

    def symmetrized(self) -> "InverseComponentSet":
        if self.flavor == "symmetrized":
            return self
        parts = {k: hermitian_part(v) for k, v in self.components.items()}
        total = None if self.accurate_total is None else hermitian_part(self.accurate_total)
        return replace(self, components=parts, flavor="symmetrized", accurate_total=total)

    def total(self) -> np.ndarray:
        if self.accurate_total is not None:
            return self.accurate_total
        return sum(self.components.values())

    def merged_real(self, tol: float = 1e-9) -> "InverseComponentSet":
        """Sum conjugate index orbits into real matrices (see the Gramian
        counterpart); the zero-plaid structure of complex-eigenvalue parts
        only shows on these merged components."""
        merged = merge_conjugate_components(self.components, self.spectrum, self.kind, tol)
        total = None if self.accurate_total is None else self.accurate_total.real
        return replace(self, components=merged, accurate_total=total)


@dataclass(frozen=True)
class NormalizationState:
    """Normalization matrix data of the finite inverse at one time point."""

    t: float
    g_inverse: np.ndarray
    condition: float


def inverse_eigenpart_counted(p: Polynomial, lam: complex):
    """One raw inverse eigenpart N(-lam)/(-N'(lam)) J y y^T with an operation
    count.

    The left eigenvector components are accumulated recursively (tail sums of
    a_k lam^k), so the whole construction touches O(n^2) scalars; the count
    is returned for the cost-growth property checks.
    """
    n = p.degree
    a = p.coeffs
    dtype = np.result_type(np.asarray(lam).dtype, np.complex128)
    ops = 0
    # powers lam^1..lam^n
    powers = np.empty(n + 1, dtype=dtype)
    powers[0] = 1.0
    for k in range(1, n + 1):
        powers[k] = powers[k - 1] * lam
        ops += 1
    # tail sums S_k = sum_{j=k}^{n} a_j lam^j (a_n = 1), then y_k = -S_k / lam^k
    y = np.empty(n, dtype=dtype)
    s = powers[n]
    y[n - 1] = -s / powers[n]
    for k in range(n - 1, 0, -1):
        s = s + a[k] * powers[k]
        y[k - 1] = -s / powers[k]
        ops += 3
    # N(-lam) and N'(lam) by Horner
    at_mirror = dtype.type(0.0)
    deriv = dtype.type(0.0)
    value = dtype.type(0.0)
    for c in a[::-1]:
        at_mirror = at_mirror * (-lam) + c
        deriv = deriv * lam + value
        value = value * lam + c
        ops += 6
    coefficient = at_mirror / (-deriv)
    signs = alternating_signs(n)
    part = coefficient * (signs[:, None] * np.outer(y, y))
    ops += 2 * n * n + n
    return part, ops


def inverse_eigenparts(
    cr: CompanionRealization,
    spec: Spectrum,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
    extended: bool = False,
) -> InverseComponentSet:
    """Eigen-indexed decomposition of the algebraic Riccati solution.

    The raw components sum to the exact inverse of the Lyapunov solution;
    each is rank one.  ``extended`` builds the components in 80-bit precision
    from re-polished eigenvalues (see the Gramian counterpart).
    """
    require_solvable(spec, solvability_tol)
    if not spec.is_simple:
        raise MultipleEigenvalueError(
            "spectrum has multiple eigenvalues; use inverse_multiple_eig"
        )
    lams = _working_values(spec, extended, cr.poly)
    parts = {
        j: inverse_eigenpart_counted(cr.poly, lam)[0] for j, lam in enumerate(lams)
    }
    total = _accurate_inverse_total(cr.poly, spec.values) if extended else None
    return InverseComponentSet(parts, "eigen", "raw", "companion", cr.poly, spec, total)


def _accurate_inverse_total(poly: Polynomial, values: np.ndarray) -> np.ndarray:
    """Sum of the raw inverse eigenparts accumulated in arbitrary precision.

    The left-eigenvector outer products can exceed the inverse by many orders
    near spectrum degeneracy; the sum is accumulated before any rounding to
    the storage dtype.
    """
    from mpmath import mp, mpc, mpf

    from .gramians import _mp_polished_roots, _mp_to_clongdouble

    n = poly.degree
    coefficients = [mpf(float(c)) for c in poly.coeffs]
    with mp.workdps(40):
        total = [[mpc(0) for _ in range(n)] for _ in range(n)]
        for z in _mp_polished_roots(poly, values):
            value = deriv = mirror = mpc(0)
            for c in coefficients[::-1]:
                deriv = deriv * z + value
                value = value * z + c
                mirror = mirror * (-z) + c
            powers = [z**k for k in range(n + 1)]
            tail = powers[n]
            y = [mpc(0)] * n
            y[n - 1] = -tail / powers[n]
            for k in range(n - 1, 0, -1):
                tail = tail + coefficients[k] * powers[k]
                y[k - 1] = -tail / powers[k]
            coefficient = mirror / (-deriv)
            for mu in range(n):
                for nu in range(n):
                    total[mu][nu] += coefficient * ((-1) ** (mu + 1)) * y[mu] * y[nu]
        return np.array(
            [[_mp_to_clongdouble(total[mu][nu]) for nu in range(n)] for mu in range(n)],
            dtype=np.clongdouble,
        )


def inverse_pair_parts(
    cr: CompanionRealization,
    spec: Spectrum,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
) -> InverseComponentSet:
    """Pair-indexed decomposition; column sums reproduce the eigen components.

    Component (i, j) equals conj(R_i) P_hat_j, worked out through left
    eigenvectors only.
    """
    require_solvable(spec, solvability_tol)
    if not spec.is_simple:
        raise MultipleEigenvalueError(
            "spectrum has multiple eigenvalues; use inverse_multiple_eig"
        )
    p = cr.poly
    parts = {}
    for i, lam_i in enumerate(spec.values):
        # first factor is built at conj(lambda_i) throughout
        mirror_i, _ = eval_with_derivative(p, -np.conj(lam_i))
        _, deriv_i = eval_with_derivative(p, np.conj(lam_i))
        y_i = left_eigenvector(np.conj(lam_i), p)
        for j, lam_j in enumerate(spec.values):
            mirror_j, _ = eval_with_derivative(p, -lam_j)
            _, deriv_j = eval_with_derivative(p, lam_j)
            y_j = left_eigenvector(lam_j, p)
            coefficient = (mirror_i * mirror_j) / (
                -(deriv_i * deriv_j) * (np.conj(lam_i) + lam_j)
            )
            parts[(i, j)] = coefficient * np.outer(y_i, y_j)
    return InverseComponentSet(parts, "pair", "raw", "companion", cr.poly, spec)


@dataclass(frozen=True)
class OrthogonalityReport:
    """Element-wise check of P_hat_i^C P_hat_j^{-C} = delta_ij R_i."""

    max_violation: float
    pairs_checked: int
    ok: bool


def orthogonality_certificate(
    gram: SpectralComponentSet,
    inv: InverseComponentSet,
    tol: float = 1e-8,
) -> OrthogonalityReport:
    """Verify the raw eigenparts of the Gramian and its inverse are
    mutually orthogonal with products delta_ij R_i."""
    if gram.flavor != "raw" or inv.flavor != "raw":
        raise ValueError("orthogonality holds for the raw (unsymmetrized) components")
    if gram.poly is None or gram.spectrum is None:
        raise ValueError("component sets must carry their polynomial and spectrum")
    residues = eigen_structure(gram.poly, gram.spectrum).residues
    scale = max(1.0, max(float(np.max(np.abs(r))) for r in residues))
    worst = 0.0
    count = 0
    for i, g_part in gram.components.items():
        for j, inv_part in inv.components.items():
            product = g_part @ inv_part
            expected = residues[i] if i == j else 0.0
            worst = max(worst, float(np.max(np.abs(product - expected))))
            count += 1
    return OrthogonalityReport(worst / scale, count, worst / scale <= tol)


def riccati_general(
    sys: LtiSystem,
    spec: Spectrum | None = None,
    pair_indexed: bool = False,
    tol_root: float = DEFAULT_TOLERANCES.root,
    tol_cluster: float = DEFAULT_TOLERANCES.cluster,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
) -> InverseComponentSet:
    """Closed-form decomposition of P^{-1} A + A^T P^{-1} = -P^{-1} b b^T P^{-1}
    for a controllable single-input system, in its original coordinates.

    Components are (C^T)^{-1} H_u^{-1} X H_u^{-1} C^{-1} of the companion
    components X.
    """
    if sys.m != 1:
        raise ValueError("the closed-form Riccati solution applies to single-input systems")
    p = char_poly(sys.a)
    if spec is None:
        spec = cluster(find_roots(p, tol_root), tol_cluster)
    ctrb = controllability_matrix(sys)
    svals = np.linalg.svd(ctrb, compute_uv=False)
    if svals[-1] == 0.0 or svals[0] / svals[-1] > 1e12:
        cond = np.inf if svals[-1] == 0.0 else float(svals[0] / svals[-1])
        raise ControllabilityError("system is uncontrollable or nearly so", condition=cond)
    cr = build_companion(p)
    if pair_indexed:
        companion_set = inverse_pair_parts(cr, spec, solvability_tol)
    else:
        companion_set = inverse_eigenparts(cr, spec, solvability_tol)
    h_u = hankel_upper(p)
    lifted = {}
    for key, x in companion_set.components.items():
        inner = np.linalg.solve(h_u, np.linalg.solve(h_u, x).conj().T).conj().T
        half = np.linalg.solve(ctrb.T, inner)
        lifted[key] = np.linalg.solve(ctrb.T, half.conj().T).conj().T
    return replace(companion_set, components=lifted, coordinate="original")


def _solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Linear solve that also handles the extended-precision dtype.

    LAPACK only covers single/double, so clongdouble systems go through a
    plain Gaussian elimination with partial pivoting (n is companion-sized).
    """
    if a.dtype != np.clongdouble and b.dtype != np.clongdouble:
        return np.linalg.solve(a, b)
    a = a.astype(np.clongdouble).copy()
    x = b.astype(np.clongdouble).copy()
    n = a.shape[0]
    for k in range(n):
        pivot = k + int(np.argmax(np.abs(a[k:, k])))
        if a[pivot, k] == 0.0:
            raise np.linalg.LinAlgError("singular matrix")
        if pivot != k:
            a[[k, pivot]] = a[[pivot, k]]
            x[[k, pivot]] = x[[pivot, k]]
        for i in range(k + 1, n):
            f = a[i, k] / a[k, k]
            a[i, k:] -= f * a[k, k:]
            x[i] -= f * x[k]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - a[i, i + 1 :] @ x[i + 1 :]) / a[i, i]
    return x


def finite_inverse(
    cr: CompanionRealization,
    spec: Spectrum,
    p0: InitialCondition,
    t: float,
    condition_cap: float = 1e12,
    solvability_tol: float = DEFAULT_TOLERANCES.solvability,
    extended: bool = False,
):
    """Inverse of the finite Gramian with boundary value P(0) = P_0.

    P^{-1}(t) = G(t) sum_j P_hat_j^{-C} with the normalization matrix defined
    through G^{-1}(t) = I - sum_i J R_i^T J e^{(lambda_i I + A^T) t}
    + sum_i P_hat_i^{-C} P_0 e^{(lambda_i I + A^T) t}.  Returns the
    normalization state and the component set scaled by G(t); the product
    with the matching finite Gramian is the identity.

    ``extended`` evaluates in 80-bit precision; unstable systems at stiff
    horizons need it for the product identity to survive in floating point
    (pair it with the equally extended finite Gramian).
    """
    require_solvable(spec, solvability_tol)
    if not spec.is_simple:
        raise MultipleEigenvalueError(
            "spectrum has multiple eigenvalues; use inverse_multiple_eig"
        )
    lams = _working_values(spec, extended, cr.poly)
    inv_components = {
        j: inverse_eigenpart_counted(cr.poly, lam)[0] for j, lam in enumerate(lams)
    }
    residues = [residue_companion(lam, cr.poly) for lam in lams]
    n = cr.n
    signs = alternating_signs(n)
    expm_t = _expm_transpose_simple(lams, residues)(t)
    g_inv = np.eye(n, dtype=expm_t.dtype)
    term_scale = 1.0
    for i, lam in enumerate(lams):
        scaled_exp = np.exp(lam * t) * expm_t
        decay = (signs[:, None] * residues[i].T * signs[None, :]) @ scaled_exp
        boundary = inv_components[i] @ p0.matrix @ scaled_exp
        g_inv += boundary - decay
        term_scale = max(
            term_scale,
            float(np.max(np.abs(decay))),
            float(np.max(np.abs(boundary))),
        )
    # condition against the size of the cancelled terms: G^{-1} built from
    # exponentials of scale term_scale can be singular while formally
    # well-scaled (e.g. t = 0 with P_0 = 0 gives the zero matrix)
    svals = np.linalg.svd(g_inv.astype(complex), compute_uv=False)
    condition = float(term_scale / max(svals[-1], 1e-300))
    if not np.isfinite(condition) or condition > condition_cap:
        raise ConditioningError(
            f"normalization matrix G(t) is numerically singular at t = {t}",
            condition=condition,
        )
    scaled = {j: _solve_dense(g_inv, part) for j, part in inv_components.items()}
    state = NormalizationState(float(t), g_inv, condition)
    inv_set = InverseComponentSet(
        inv_components, "eigen", "raw", "companion", cr.poly, spec
    )
    return state, replace(inv_set, components=scaled)


def _solve_upper_hankel(hvals: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve H X = rhs for the upper anti-triangular Hankel H[i, j] = h_{i+j}.

    Back-substitution from the last row up; O(m^2) per column.
    """
    m = hvals.size
    pivot = hvals[m - 1]
    x = np.zeros_like(rhs, dtype=complex)
    for r in range(m - 1, -1, -1):
        idx = m - 1 - r
        acc = rhs[r].astype(complex)
        for j in range(idx):
            acc = acc - hvals[r + j] * x[j]
        x[idx] = acc / pivot
    return x


def inverse_multiple_eig(
    cr: CompanionRealization,
    chains: JordanChainSet,
    pivot_tol: float = 1e-12,
) -> InverseComponentSet:
    """Eigen-indexed inverse decomposition for multiple eigenvalues.

    Component j is J (M_j^{(-1)})^T T_j H_j^{-1} M_j^{(-1)}; the chain Hankel
    H_j is anti-triangular and inverted by back-substitution.  A vanishing
    anti-diagonal (last left-chain vector with zero final entry) makes the
    chain degenerate.
    """
    if chains.c_row is None:
        raise ValueError("inverse decomposition needs companion Jordan chains")
    n = cr.n
    signs = alternating_signs(n)
    parts = {}
    for j, block in enumerate(chains.blocks):
        hvals = block.left[:, n - 1]
        scale = max(1.0, float(np.max(np.abs(block.left))))
        if abs(hvals[-1]) <= pivot_tol * scale:
            raise ConditioningError(
                f"chain Hankel for eigenvalue {block.eigenvalue} is singular "
                "(last left-chain vector has zero final entry)"
            )
        x = _solve_upper_hankel(hvals, block.left)
        parts[j] = signs[:, None] * (block.left.T @ (block.toeplitz @ x))
    spec = chains.spectrum
    return InverseComponentSet(parts, "eigen", "raw", "companion", cr.poly, spec)
