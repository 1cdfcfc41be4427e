"""Companion realization, similarity transform, eigenvectors, Jordan chains.

All closed-form spectral machinery lives in the controllability canonical
basis: the dynamics matrix carries the characteristic coefficients in its
last row and the input is the last unit vector.  Right eigenvectors are
Vandermonde columns, left eigenvectors come from a Hankel matrix of the
coefficients, and Jordan chains for multiple eigenvalues follow a Pascal-type
recursion in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ControllabilityError, MultipleEigenvalueError
from .spectrum import Polynomial, Spectrum, char_poly, eval_with_derivative

CONDITION_CAP = 1e12


@dataclass(frozen=True)
class LtiSystem:
    """Continuous LTI pair (A, B); the object under analysis."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.asarray(self.b, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, got shape {a.shape}")
        if b.shape[0] != a.shape[0]:
            raise ValueError(f"B must have {a.shape[0]} rows, got shape {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("system matrices must have finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]


@dataclass(frozen=True)
class CompanionRealization:
    """Companion pair (A_C, b_C) of a monic characteristic polynomial."""

    poly: Polynomial
    a_c: np.ndarray
    b_c: np.ndarray

    @property
    def n(self) -> int:
        return self.poly.degree

    def system(self) -> LtiSystem:
        return LtiSystem(self.a_c, self.b_c)


@dataclass(frozen=True)
class SimilarityTransform:
    """Change of basis T = C * H_u mapping companion coordinates to original."""

    t: np.ndarray
    hankel: np.ndarray
    controllability: np.ndarray


def alternating_signs(n: int) -> np.ndarray:
    """Diagonal of the sign matrix diag(-1, +1, ..., (-1)^n)."""
    return np.array([(-1.0) ** (k + 1) for k in range(n)])


def build_companion(p: Polynomial) -> CompanionRealization:
    """Companion matrix with -a_0..-a_{n-1} in the last row, b = e_n."""
    n = p.degree
    a_c = np.zeros((n, n))
    if n > 1:
        a_c[: n - 1, 1:] = np.eye(n - 1)
    a_c[n - 1, :] = -p.coeffs[:n]
    b_c = np.zeros(n)
    b_c[n - 1] = 1.0
    return CompanionRealization(p, a_c, b_c)


def hankel_upper(p: Polynomial) -> np.ndarray:
    """Upper anti-triangular Hankel of coefficients, first row (a_1 ... a_{n-1} 1)."""
    n = p.degree
    h = np.zeros((n, n))
    for i in range(n):
        for j in range(n - i):
            h[i, j] = p.coeffs[i + j + 1]
    return h


def hankel_lower(p: Polynomial) -> np.ndarray:
    """Lower anti-triangular Hankel, last row (a_0 ... a_{n-1})."""
    n = p.degree
    h = np.zeros((n, n))
    for i in range(n):
        for j in range(n - 1 - i, n):
            h[i, j] = p.coeffs[i + j + 1 - n]
    return h


def controllability_matrix(sys: LtiSystem) -> np.ndarray:
    """C = [B, AB, ..., A^{n-1}B], shape n x (n m)."""
    blocks = []
    current = sys.b
    for _ in range(sys.n):
        blocks.append(current)
        current = sys.a @ current
    return np.hstack(blocks)


def to_companion(sys: LtiSystem, poly_tol: float = 1e-8):
    """Similarity transform of a controllable SI system to companion form.

    Returns (SimilarityTransform, CompanionRealization) with T = C * H_u and
    verifies A T = T A_C and b = T b_C.  Raises ControllabilityError when the
    controllability matrix is near-singular (condition above 1e12).
    """
    if sys.m != 1:
        raise ValueError(f"companion transform requires a single-input system, got m={sys.m}")
    ctrb = controllability_matrix(sys)
    svals = np.linalg.svd(ctrb, compute_uv=False)
    if svals[-1] == 0.0 or svals[0] / svals[-1] > CONDITION_CAP:
        cond = np.inf if svals[-1] == 0.0 else float(svals[0] / svals[-1])
        raise ControllabilityError("system is uncontrollable or nearly so", condition=cond)
    p = char_poly(sys.a)
    cr = build_companion(p)
    h_u = hankel_upper(p)
    t = ctrb @ h_u
    scale = np.linalg.norm(sys.a) * np.linalg.norm(t) + 1.0
    if np.linalg.norm(sys.a @ t - t @ cr.a_c) > poly_tol * scale:
        raise ControllabilityError("similarity verification A T = T A_C failed")
    if np.linalg.norm(sys.b[:, 0] - t @ cr.b_c) > poly_tol * (1.0 + np.linalg.norm(sys.b)):
        raise ControllabilityError("similarity verification b = T b_C failed")
    return SimilarityTransform(t, h_u, ctrb), cr


def right_eigenvector(lam: complex, n: int) -> np.ndarray:
    """Vandermonde eigenvector (1, lam, lam^2, ..., lam^{n-1})."""
    return lam ** np.arange(n, dtype=float)


def left_eigenvector(lam: complex, p: Polynomial, zero_tol: float = 1e-12) -> np.ndarray:
    """Left eigenvector y = H_l x / lam^n, normalized so the last entry is -1.

    lam = 0 (excluded by the solvability condition with i = j) is rejected.
    """
    if abs(lam) <= zero_tol * (1.0 + np.max(np.abs(p.coeffs))):
        raise ValueError("left eigenvector undefined for eigenvalue at the origin")
    x = right_eigenvector(lam, p.degree)
    return (hankel_lower(p) @ x) / lam**p.degree


def residue_companion(lam: complex, p: Polynomial, deriv_tol: float = 1e-8) -> np.ndarray:
    """Resolvent residue R = x y^T / (-N'(lam)) for a simple eigenvalue."""
    _, deriv = eval_with_derivative(p, lam)
    scale = float(np.max(np.abs(p.coeffs)))
    if abs(deriv) <= deriv_tol * scale:
        raise MultipleEigenvalueError(
            f"|N'({lam})| = {abs(deriv):.3e} is below tolerance; eigenvalue is "
            "numerically multiple, use the Jordan-chain decomposition"
        )
    x = right_eigenvector(lam, p.degree)
    y = left_eigenvector(lam, p)
    return np.outer(x, y) / (-deriv)


@dataclass(frozen=True)
class EigenStructure:
    """Right/left eigenvectors and residues of a simple companion spectrum.

    Column i of ``right``/``left`` is x_i/y_i; residues[i] is R_i.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    residues: np.ndarray


def eigen_structure(p: Polynomial, spec: Spectrum) -> EigenStructure:
    if not spec.is_simple:
        raise MultipleEigenvalueError("eigen structure requires a simple spectrum")
    n = p.degree
    lams = spec.values
    right = np.column_stack([right_eigenvector(lam, n) for lam in lams])
    left = np.column_stack([left_eigenvector(lam, p) for lam in lams])
    residues = np.stack([residue_companion(lam, p) for lam in lams])
    return EigenStructure(lams, right, left, residues)


def residues_general(a, spec: Spectrum, separation_tol: float = 1e-8) -> np.ndarray:
    """Resolvent residues of an arbitrary matrix with a simple spectrum.

    Lagrange form R_i = prod_{j != i} (A - lambda_j I) / (lambda_i - lambda_j);
    avoids a general eigensolver.
    """
    a = np.asarray(a, dtype=float)
    if not spec.is_simple:
        raise MultipleEigenvalueError("Lagrange residues require a simple spectrum")
    lams = spec.values
    n = a.shape[0]
    if lams.size != n:
        raise ValueError("spectrum size does not match the matrix dimension")
    if lams.size > 1:
        sep = min(
            abs(lams[i] - lams[j]) for i in range(n) for j in range(i + 1, n)
        )
        if sep <= separation_tol * (1.0 + spec.radius):
            raise MultipleEigenvalueError(
                f"eigenvalue separation {sep:.3e} is below the cluster tolerance"
            )
    residues = []
    for i, lam_i in enumerate(lams):
        r = np.eye(n, dtype=complex)
        for j, lam_j in enumerate(lams):
            if j != i:
                r = r @ (a - lam_j * np.eye(n)) / (lam_i - lam_j)
        residues.append(r)
    return np.stack(residues)


@dataclass(frozen=True)
class JordanBlockChain:
    """Chain data for one clustered eigenvalue.

    ``right`` holds the chain columns x_1..x_{n_i} (n x n_i), ``left`` the
    matching rows of the inverse modal matrix (n_i x n).  ``toeplitz`` and
    ``hankel`` are the companion-only factor matrices (None when the chains
    came from a non-companion system).
    """

    eigenvalue: complex
    multiplicity: int
    right: np.ndarray
    left: np.ndarray
    toeplitz: np.ndarray | None = None
    hankel: np.ndarray | None = None


@dataclass(frozen=True)
class JordanChainSet:
    """Jordan chains of all clustered eigenvalues plus the full modal pair."""

    spectrum: Spectrum
    blocks: list
    modal: np.ndarray
    modal_inverse: np.ndarray
    c_row: np.ndarray | None = None

    @classmethod
    def from_modal_matrices(cls, spec: Spectrum, modal, modal_inverse) -> "JordanChainSet":
        """Wrap externally supplied chains (general, non-companion systems)."""
        modal = np.asarray(modal, dtype=complex)
        modal_inverse = np.asarray(modal_inverse, dtype=complex)
        blocks = []
        start = 0
        for lam, mult in zip(spec.values, spec.multiplicities):
            blocks.append(
                JordanBlockChain(
                    lam, int(mult), modal[:, start : start + mult],
                    modal_inverse[start : start + mult, :],
                )
            )
            start += mult
        return cls(spec, blocks, modal, modal_inverse)


def _chain_columns(lam: complex, mult: int, n: int) -> np.ndarray:
    """Closed-form companion Jordan chain for one eigenvalue.

    Column m has entries c_{m,k} lam^{k-m} where c_{1,k} = 1, c_{m,1} = 1 and
    c_{m+1,k+1} = c_{m+1,k} + c_{m,k}; this is the Vandermonde vector and its
    normalized derivative chain, satisfying (A_C - lam I) x_{m+1} = x_m.
    """
    cols = np.zeros((n, mult), dtype=complex)
    c_prev = np.ones(n)
    for m in range(mult):
        if m == 0:
            c = np.ones(n)
        else:
            c = np.ones(n)
            for k in range(1, n):
                c[k] = c[k - 1] + c_prev[k - 1]
        powers = np.arange(n) - m
        cols[:, m] = c * lam ** powers.astype(float)
        c_prev = c
    return cols


def jordan_chains_companion(
    spec: Spectrum, p: Polynomial, root_tol: float = 1e-8
) -> JordanChainSet:
    """Jordan chains, Toeplitz and Hankel factors for a companion system.

    The left chains come from inverting the full modal matrix once; an
    ill-conditioned modal matrix (condition above 1e12, typically from
    under-clustered nearly-multiple eigenvalues) is rejected.
    """
    n = p.degree
    if spec.n != n:
        raise ValueError("total spectrum multiplicity does not match the polynomial degree")
    scale = np.max(np.abs(p.coeffs))
    for lam in spec.values:
        value, _ = eval_with_derivative(p, lam)
        if abs(value) > root_tol * scale * max(1.0, abs(lam)) ** n:
            raise ValueError(
                f"spectrum entry {lam} is not a root of the polynomial "
                f"(|N| = {abs(value):.3e})"
            )
        if abs(lam) <= root_tol * (1.0 + spec.radius):
            raise ValueError("Jordan chains undefined for an eigenvalue at the origin")

    modal = np.hstack(
        [
            _chain_columns(lam, int(mult), n)
            for lam, mult in zip(spec.values, spec.multiplicities)
        ]
    )
    cond = np.linalg.cond(modal)
    if not np.isfinite(cond) or cond > CONDITION_CAP:
        raise ConditioningError(
            "modal matrix of Jordan chains is numerically singular", condition=float(cond)
        )
    modal_inverse = np.linalg.inv(modal)

    signs = alternating_signs(n)
    c_row = p.coeffs[:n] * ((-1.0) ** n + signs)

    blocks = []
    start = 0
    for lam, mult in zip(spec.values, spec.multiplicities):
        mult = int(mult)
        right = modal[:, start : start + mult]
        left = modal_inverse[start : start + mult, :]
        tvals = c_row @ right
        toeplitz = np.zeros((mult, mult), dtype=complex)
        for i in range(mult):
            for j in range(i + 1):
                toeplitz[i, j] = tvals[i - j]
        hvals = left[:, n - 1]
        hankel = np.zeros((mult, mult), dtype=complex)
        for i in range(mult):
            for j in range(mult - i):
                hankel[i, j] = hvals[i + j]
        blocks.append(JordanBlockChain(lam, mult, right, left, toeplitz, hankel))
        start += mult
    return JordanChainSet(spec, blocks, modal, modal_inverse, c_row)
