"""Minimum-energy control, its modal splitting, and the energy meaning of the
spectral components.

The quadratic forms are computed for any solvable spectrum; only for a
strictly stable system do they measure control energy, which the
``interpretation_valid`` flag records.  Quadrature checks use a composite
trapezoid rule on (-T, 0) with T = 40 / min |Re lambda|.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .companion import CompanionRealization, build_companion, eigen_structure
from .errors import StabilityError
from .gramians import SpectralComponentSet
from .inverse import InverseComponentSet, inverse_eigenparts, inverse_pair_parts
from .spectrum import Spectrum

QUADRATURE_POINTS = 40_000


def _real_quadratic_form(x0: np.ndarray, matrix: np.ndarray, tol: float = 1e-9) -> float:
    value = complex(x0 @ matrix @ x0)
    scale = max(1.0, abs(value))
    if abs(value.imag) > tol * scale:
        raise ValueError(f"quadratic form has non-negligible imaginary part {value.imag:.3e}")
    return value.real


def min_energy(x0, inv: InverseComponentSet) -> float:
    """Quadratic form x_0^T P^{-1} x_0 from the summed inverse eigenparts.

    Equals the minimum control energy to reach x_0 from rest when the system
    is stable; for unstable systems it is returned as a plain quadratic form.
    """
    x0 = np.asarray(x0, dtype=float)
    return _real_quadratic_form(x0, inv.symmetrized().total())


@dataclass(frozen=True)
class EnergyPartition:
    """Linear and quadratic splits of the minimum-energy quadratic form."""

    total: float
    linear: np.ndarray
    quadratic: np.ndarray
    x0: np.ndarray
    interpretation_valid: bool


def energy_partition(
    x0,
    inv: InverseComponentSet,
    inv_pairs: InverseComponentSet | None = None,
) -> EnergyPartition:
    """E_i = x_0^T P~_i^{-C} x_0 and E_ij = x_0^T P_ij^{-C} x_0.

    Both partitions sum to the total quadratic form.  Pair components are
    derived from the set's own polynomial when not supplied.
    """
    x0 = np.asarray(x0, dtype=float)
    if inv.kind != "eigen":
        raise ValueError("energy partition expects the eigen-indexed inverse set")
    if inv_pairs is None:
        if inv.poly is None or inv.spectrum is None or inv.coordinate != "companion":
            raise ValueError("pair components must be supplied for this component set")
        cr = build_companion(inv.poly)
        inv_pairs = inverse_pair_parts(cr, inv.spectrum)
    sym = inv.symmetrized()
    pair_sym = inv_pairs.symmetrized()
    k = len(sym.components)
    linear = np.array([_real_quadratic_form(x0, sym.components[i]) for i in range(k)])
    quadratic = np.array(
        [[_real_quadratic_form(x0, pair_sym.components[(i, j)]) for j in range(k)] for i in range(k)]
    )
    total = _real_quadratic_form(x0, sym.total())
    stable = bool(inv.spectrum.is_stable) if inv.spectrum is not None else False
    return EnergyPartition(total, linear, quadratic, x0, stable)


@dataclass(frozen=True)
class OptimalControlSignal:
    """Minimum-energy control u(t) on t <= 0 and its modal components.

    u_i(t) = kappa_i e^{-conj(lambda_i) t}; the modal components sum to the
    (real) control exactly for conjugate-closed spectra.  ``horizon`` is the
    quadrature window 40 / min |Re lambda|.
    """

    kappa: np.ndarray
    rates: np.ndarray
    horizon: float

    def modal(self, t) -> np.ndarray:
        """Modal components, shape (n_modes,) + shape(t)."""
        t = np.asarray(t, dtype=float)
        return self.kappa[(...,) + (None,) * t.ndim] * np.exp(
            np.multiply.outer(self.rates, t)
        )

    def control(self, t):
        """The control signal itself (real)."""
        total = np.sum(self.modal(t), axis=0)
        return total.real


def optimal_control(x0, cr: CompanionRealization, spec: Spectrum) -> OptimalControlSignal:
    """Spectral form of the minimum-energy control for a stable companion
    system: u(t) = e_n^T e^{-A_C^T t} P^{-1} x_0 with modal components
    e_n^T R_i^* e^{-conj(lambda_i) t} P^{-1} x_0."""
    if not spec.is_stable:
        raise StabilityError("optimal control requires a strictly stable spectrum")
    x0 = np.asarray(x0, dtype=float)
    w = inverse_eigenparts(cr, spec).total() @ x0
    residues = eigen_structure(cr.poly, spec).residues
    n = cr.n
    kappa = np.array([np.conj(residues[i][:, n - 1]) @ w for i in range(spec.values.size)])
    rates = -np.conj(spec.values)
    horizon = 40.0 / float(np.min(np.abs(spec.values.real)))
    return OptimalControlSignal(kappa, rates, horizon)


def control_energy_quadrature(
    signal: OptimalControlSignal, points: int = QUADRATURE_POINTS
) -> float:
    """Trapezoid quadrature of the control energy over (-horizon, 0)."""
    t = np.linspace(-signal.horizon, 0.0, points)
    u = signal.control(t)
    return float(np.trapezoid(u * u, t))


@dataclass(frozen=True)
class OverlapReport:
    """Closed-form modal overlap integrals with their quadrature check.

    ``max_error`` is relative to the largest overlap magnitude; individual
    overlaps can be orders of magnitude larger than their sum (the minimum
    energy), so absolute agreement is not the meaningful measure.
    """

    closed_form: np.ndarray
    quadrature: np.ndarray
    max_error: float


def modal_overlap_integrals(
    x0,
    gram_pairs: SpectralComponentSet,
    cr: CompanionRealization,
    spec: Spectrum,
    points: int = QUADRATURE_POINTS,
) -> OverlapReport:
    """Certify x_0^T P^{-1} P_ij^C P^{-1} x_0 against the overlap integrals
    (1/2) int (conj(u_i) u_j + conj(u_j) u_i) dt of the modal controls."""
    if not spec.is_stable:
        raise StabilityError("overlap integrals require a strictly stable spectrum")
    if gram_pairs.kind != "pair":
        raise ValueError("overlap integrals expect the pair-indexed Gramian set")
    x0 = np.asarray(x0, dtype=float)
    w = (inverse_eigenparts(cr, spec).total() @ x0).real
    pair_sym = gram_pairs.symmetrized()
    k = spec.values.size
    closed = np.array(
        [
            [_real_quadratic_form(w, pair_sym.components[(i, j)]) for j in range(k)]
            for i in range(k)
        ]
    )
    signal = optimal_control(x0, cr, spec)
    t = np.linspace(-signal.horizon, 0.0, points)
    modes = signal.modal(t)
    quad = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            integrand = 0.5 * (np.conj(modes[i]) * modes[j] + np.conj(modes[j]) * modes[i])
            quad[i, j] = float(np.trapezoid(integrand.real, t))
    scale = max(1.0, float(np.max(np.abs(closed))))
    return OverlapReport(closed, quad, float(np.max(np.abs(closed - quad))) / scale)
