"""Command-line interface: system ingestion, command orchestration and report
emission.

Commands
--------
``gramspec analyze``  spectral decompositions (eigen, pair, finite, inverse)
``gramspec verify``   closed-form results against the brute-force oracles
``gramspec energy``   minimum-energy partitions and optional control series
``gramspec roots``    spectrum pipeline only

Reports are JSON with sorted keys (byte-identical for fixed inputs, seed and
tolerances); complex matrices are emitted as separate re/im row-major arrays,
and every matrix carries a verification residual.  Time series are CSV.

Exit codes: 0 success, 1 usage or schema error, 2 solvability violation,
3 conditioning failure (uncontrollable system, ill-conditioned chains,
singular normalization, near-multiple eigenvalues), 4 failed verification
checks.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import oracle
from .companion import (
    LtiSystem,
    build_companion,
    jordan_chains_companion,
    to_companion,
)
from .document import SystemDocument, parse_system
from .energy import control_energy_quadrature, energy_partition, optimal_control
from .errors import (
    ConditioningError,
    ControllabilityError,
    ConvergenceError,
    GramspecError,
    MultipleEigenvalueError,
    SchemaError,
    SolvabilityError,
)
from .gramians import (
    InitialCondition,
    exponent_collisions,
    finite_pair_subgramians,
    finite_subgramians,
    homogeneous_decomposition,
    infinite_pair_subgramians,
    infinite_subgramians,
    lift_to_original,
    multiple_eig_gramian,
    zero_plaid_defect,
)
from .inverse import (
    finite_inverse,
    inverse_eigenparts,
    inverse_multiple_eig,
    inverse_pair_parts,
    orthogonality_certificate,
    riccati_general,
)
from .spectrum import (
    Polynomial,
    Tolerances,
    char_poly,
    check_solvability,
    cluster,
    eval_with_derivative,
    find_roots,
    poly_from_roots,
)

SIGN_CONVENTION_NOTE = (
    "sign convention: raw eigen components are x x^T J / (-N'(lambda) N(-lambda)); "
    "the overall sign is pinned by the scalar system dx/dt = -x + u (Gramian 1/2) "
    "and enforced by the Lyapunov residual checks"
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVABILITY = 2
EXIT_CONDITIONING = 3
EXIT_VERIFY_FAILED = 4


# ---------------------------------------------------------------------------
# serialization helpers


def _matrix_json(m) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _entry(matrix, residual: float) -> dict:
    return {"matrix": _matrix_json(matrix), "residual": float(residual)}


def _eigen_key(i: int) -> str:
    return str(i + 1)


def _pair_key(key) -> str:
    i, j = key
    return f"{i + 1},{j + 1}"


def _spectrum_json(spec) -> list:
    return [
        {"re": float(lam.real), "im": float(lam.imag), "multiplicity": int(mult)}
        for lam, mult in zip(spec.values, spec.multiplicities)
    ]


def _solvability_json(report) -> dict:
    return {
        "ok": bool(report.ok),
        "violating_pairs": [[int(i) + 1, int(j) + 1] for i, j in report.violating_pairs],
        "min_pair_magnitude": float(report.min_pair_magnitude),
    }


# ---------------------------------------------------------------------------
# per-component verification residuals


def _eigen_component_residual(a_c, lam, multiplicity, raw, side: str) -> float:
    """Defect of the raw component's spectral identity.

    Gramian components live in the (generalized) right eigenspace,
    (A - lambda I)^m X = 0; inverse components in the left one,
    X (A - lambda I)^m = 0.
    """
    n = a_c.shape[0]
    shifted = np.linalg.matrix_power(a_c - lam * np.eye(n), int(multiplicity))
    defect = shifted @ raw if side == "left" else raw @ shifted
    scale = (1.0 + abs(lam)) ** multiplicity * max(1e-300, float(np.linalg.norm(raw)))
    return float(np.linalg.norm(defect) / scale)


def _pair_component_residual(a_c, rate, raw, side: str) -> float:
    """Defect of A X + X A^T = rate X (gramian pairs) or its transposed
    counterpart A^T X + X A = rate X (inverse pairs)."""
    if side == "left":
        defect = a_c @ raw + raw @ a_c.T - rate * raw
    else:
        defect = a_c.T @ raw + raw @ a_c - rate * raw
    scale = (1.0 + abs(rate)) * max(1e-300, float(np.linalg.norm(raw)))
    return float(np.linalg.norm(defect) / scale)


def _component_block(component_set, a_c, spec, flavor: str, side: str = "left") -> dict:
    """Serialize one component set with per-component identity residuals."""
    emitted = component_set.symmetrized() if flavor == "symmetrized" else component_set
    out = {}
    for key, raw in component_set.components.items():
        if component_set.kind == "eigen":
            residual = _eigen_component_residual(
                a_c, spec.values[key], spec.multiplicities[key], raw, side
            )
            out[_eigen_key(key)] = _entry(emitted.components[key], residual)
        else:
            i, j = key
            if side == "left":
                rate = spec.values[i] + np.conj(spec.values[j])
            else:
                rate = np.conj(spec.values[i]) + spec.values[j]
            residual = _pair_component_residual(a_c, rate, raw, side)
            out[_pair_key(key)] = _entry(emitted.components[key], residual)
    return out


# ---------------------------------------------------------------------------
# resolution pipeline


@dataclass
class ResolvedSystem:
    doc: SystemDocument
    poly: Polynomial
    spectrum: object
    solvability: object
    cr: object
    sys: LtiSystem | None
    warnings: list


def resolve_document(doc: SystemDocument, tols: Tolerances) -> ResolvedSystem:
    """Run the spectrum pipeline on a parsed document."""
    warnings = [SIGN_CONVENTION_NOTE]
    system = None
    if doc.source == "eigenvalues":
        spec = doc.spectrum()
        poly = poly_from_roots(spec.expanded())
    elif doc.source == "char_poly":
        poly = Polynomial(doc.char_poly)
        spec = cluster(find_roots(poly, tols.root), tols.cluster)
    else:
        system = LtiSystem(*doc.matrices)
        poly = char_poly(system.a)
        spec = cluster(find_roots(poly, tols.root), tols.cluster)
    solvability = check_solvability(spec, tols.solvability)
    cr = build_companion(poly)
    if spec.is_simple and spec.n > 1:
        derivs = [abs(eval_with_derivative(poly, lam)[1]) for lam in spec.values]
        scale = float(np.max(np.abs(poly.coeffs)))
        if min(derivs) <= 1e-6 * scale:
            warnings.append(
                "spectrum is numerically close to a multiple eigenvalue; "
                "consider a looser --tol-cluster to trigger the Jordan-chain path"
            )
    collisions = exponent_collisions(spec)
    if collisions:
        pairs = "; ".join(f"{_pair_key(a)} ~ {_pair_key(b)}" for a, b in collisions)
        warnings.append(
            f"pair-component exponents collide ({pairs}); pair components are "
            "not unique, their sums are"
        )
    return ResolvedSystem(doc, poly, spec, solvability, cr, system, warnings)


def _require_solvable_or_raise(resolved: ResolvedSystem):
    if not resolved.solvability.ok:
        raise SolvabilityError(resolved.solvability)


def _initial_condition(doc: SystemDocument, override: np.ndarray | None) -> np.ndarray | None:
    if override is not None:
        return override
    return doc.initial_condition


def _companion_initial(p0: np.ndarray, resolved: ResolvedSystem) -> InitialCondition:
    """Initial condition in companion coordinates.

    Matrix documents state P_0 in their own coordinates; it is pulled back
    through the similarity transform (single-input systems only).
    """
    if resolved.sys is None:
        return InitialCondition(p0)
    if resolved.sys.m != 1:
        raise ControllabilityError(
            "initial conditions for multi-input matrix documents are not supported"
        )
    transform, _ = to_companion(resolved.sys)
    t_inv = np.linalg.inv(transform.t)
    return InitialCondition(t_inv @ p0 @ t_inv.T)


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(
    doc: SystemDocument,
    tols: Tolerances = Tolerances(),
    pairs: bool = False,
    finite: float | None = None,
    inverse: bool = False,
    initial: np.ndarray | None = None,
    raw: bool = False,
    seed: int | None = None,
) -> dict:
    """Full spectral analysis of a system document.

    Selects the simple or multiple-eigenvalue path automatically and attaches
    oracle residuals to every emitted matrix.
    """
    resolved = resolve_document(doc, tols)
    _require_solvable_or_raise(resolved)
    spec, cr, poly = resolved.spectrum, resolved.cr, resolved.poly
    flavor = "raw" if raw else "symmetrized"
    a_c, b_c = cr.a_c, cr.b_c
    bbt = np.outer(b_c, b_c)
    report: dict = {
        "schema": 1,
        "command": "analyze",
        "label": doc.label,
        "seed": seed,
        "tolerances": {
            "root": tols.root,
            "cluster": tols.cluster,
            "solvability": tols.solvability,
        },
        "system": {"n": poly.degree, "m": 1 if resolved.sys is None else resolved.sys.m,
                   "source": doc.source},
        "polynomial": poly.coeffs.tolist(),
        "spectrum": _spectrum_json(spec),
        "solvability": _solvability_json(resolved.solvability),
        "flavor": flavor,
        "warnings": resolved.warnings,
    }

    multiple = not spec.is_simple
    if multiple:
        chains = jordan_chains_companion(spec, poly)
        gram_decomp = multiple_eig_gramian(a_c, b_c, spec, t=finite)
        gram_set = gram_decomp.static
        if pairs:
            report["warnings"] = report["warnings"] + [
                "pair components are only defined for simple spectra; skipped"
            ]
    else:
        gram_set = infinite_subgramians(cr, spec, tols.solvability)

    gram_sum = gram_set.symmetrized().total()
    gramian_block = {
        "coordinate": "companion",
        "eigen": _component_block(gram_set, a_c, spec, flavor),
        "sum": _entry(gram_sum, oracle.residual_lyapunov(a_c, bbt, gram_sum)),
    }
    if pairs and not multiple:
        pair_set = infinite_pair_subgramians(cr, spec, tols.solvability)
        gramian_block["pair"] = _component_block(pair_set, a_c, spec, flavor)
    report["gramian"] = gramian_block

    if resolved.sys is not None:
        lifted = lift_to_original(gram_set, resolved.sys)
        lifted_sum = lifted.symmetrized().total()
        report["gramian_original"] = {
            "coordinate": "original",
            "sum": _entry(
                lifted_sum,
                oracle.residual_lyapunov(
                    resolved.sys.a, resolved.sys.b @ resolved.sys.b.T, lifted_sum
                ),
            ),
        }

    if inverse:
        if multiple:
            inv_set = inverse_multiple_eig(cr, chains)
        else:
            inv_set = inverse_eigenparts(cr, spec, tols.solvability)
        inv_sum = inv_set.symmetrized().total()
        inverse_block = {
            "coordinate": "companion",
            "eigen": _component_block(inv_set, a_c, spec, flavor, side="right"),
            "sum": _entry(inv_sum, oracle.residual_riccati(a_c, b_c, inv_sum)),
            "product_residual": float(
                np.max(np.abs(inv_set.total() @ gram_set.total() - np.eye(poly.degree)))
            ),
        }
        if pairs and not multiple:
            inv_pairs = inverse_pair_parts(cr, spec, tols.solvability)
            inverse_block["pair"] = _component_block(inv_pairs, a_c, spec, flavor, side="right")
        report["inverse"] = inverse_block
        if resolved.sys is not None and resolved.sys.m == 1 and not multiple:
            original = riccati_general(resolved.sys, spec)
            osum = original.symmetrized().total()
            report["inverse_original"] = {
                "coordinate": "original",
                "sum": _entry(
                    osum, oracle.residual_riccati(resolved.sys.a, resolved.sys.b, osum)
                ),
            }

    if finite is not None:
        t = float(finite)
        if multiple:
            finite_set = gram_decomp.component_set(t=t, flavor=flavor)
            finite_sum = gram_decomp.total(t=t)
            decomp_total = gram_decomp.total
        else:
            decomp = finite_subgramians(cr, spec, t, tols.solvability)
            finite_set = decomp.component_set(flavor=flavor)
            finite_sum = decomp.total()
            decomp_total = decomp.total
        h = 1e-5
        derivative = (decomp_total(t=t + h) - decomp_total(t=max(t - h, 0.0))) / (
            h + min(t, h)
        )
        defect = -derivative + a_c @ finite_sum + finite_sum @ a_c.T + bbt
        diff_residual = float(
            np.linalg.norm(defect) / max(1.0, np.linalg.norm(finite_sum))
        )
        finite_block = {
            "t": t,
            "eigen": {
                _eigen_key(k): _entry(m, 0.0) for k, m in finite_set.components.items()
            },
            "sum": _entry(finite_sum, diff_residual),
        }
        if pairs and not multiple:
            pair_decomp = finite_pair_subgramians(cr, spec, t, tols.solvability)
            pair_finite = pair_decomp.component_set(flavor=flavor)
            finite_block["pair"] = {
                _pair_key(k): _entry(m, 0.0) for k, m in pair_finite.components.items()
            }
        p0 = _initial_condition(doc, initial)
        if p0 is not None and not multiple:
            p0c = _companion_initial(p0, resolved)
            eigen_h, _ = homogeneous_decomposition(cr, spec, p0c, t)
            hom_sum = eigen_h.symmetrized().total()
            finite_block["homogeneous_sum"] = _entry(
                hom_sum,
                float(
                    np.max(
                        np.abs(
                            sum(
                                homogeneous_decomposition(cr, spec, p0c, 0.0)[0]
                                .components.values()
                            )
                            - p0c.matrix
                        )
                    )
                ),
            )
        report["finite"] = finite_block
        if inverse and not multiple:
            p0c = (
                _companion_initial(p0, resolved)
                if p0 is not None
                else InitialCondition(np.zeros((poly.degree, poly.degree)))
            )
            try:
                state, inv_finite = finite_inverse(cr, spec, p0c, t)
                gram_t = decomp_total(t=t)
            except ConditioningError:
                if p0 is not None:
                    raise
                state, inv_finite = finite_inverse(
                    cr, spec, p0c, t, condition_cap=1e17, extended=True
                )
                gram_t = finite_subgramians(cr, spec, t, extended=True).total()
                report["warnings"] = report["warnings"] + [
                    "finite inverse evaluated in extended precision "
                    "(normalization matrix ill-conditioned at this horizon)"
                ]
            if p0 is not None:
                gram_t = gram_t + sum(
                    homogeneous_decomposition(cr, spec, p0c, t)[0].components.values()
                )
            product_residual = float(
                np.max(np.abs(inv_finite.total() @ gram_t - np.eye(poly.degree)))
            )
            report["finite_inverse"] = {
                "t": t,
                "normalization_condition": state.condition,
                "sum": _entry(inv_finite.total(), product_residual),
            }

    return report


# ---------------------------------------------------------------------------
# verify


def _check(name: str, value: float, tolerance: float) -> dict:
    return {
        "name": name,
        "value": float(value),
        "tolerance": float(tolerance),
        "pass": bool(value <= tolerance),
    }


def cmd_verify(doc: SystemDocument, tols: Tolerances = Tolerances(), seed: int | None = None) -> dict:
    """Closed-form results against the independent oracles, one line per check.

    The seed fixes the random probe vectors (initial condition and energy
    target) so reports are reproducible byte for byte.
    """
    resolved = resolve_document(doc, tols)
    _require_solvable_or_raise(resolved)
    spec, cr, poly = resolved.spectrum, resolved.cr, resolved.poly
    n = poly.degree
    if n > oracle.ORACLE_DIMENSION_CAP:
        raise ValueError(
            f"verification uses the dense oracle, capped at n = {oracle.ORACLE_DIMENSION_CAP}"
        )
    a_c, b_c = cr.a_c, cr.b_c
    bbt = np.outer(b_c, b_c)
    rng = np.random.default_rng(0 if seed is None else seed)
    checks = []

    checks.append(
        _check(
            "solvability_margin",
            tols.solvability * (1.0 + spec.radius) / max(resolved.solvability.min_pair_magnitude, 1e-300),
            1.0,
        )
    )

    reference = oracle.solve_lyapunov_dense(a_c, bbt)
    ref_norm = max(1e-300, float(np.linalg.norm(reference.matrix)))

    multiple = not spec.is_simple
    if multiple:
        chains = jordan_chains_companion(spec, poly)
        gram_set = multiple_eig_gramian(a_c, b_c, spec).component_set(t=0.0)
        inv_set = inverse_multiple_eig(cr, chains)
        recursion_defect = 0.0
        for block in chains.blocks:
            shifted = a_c - block.eigenvalue * np.eye(n)
            defect = np.linalg.norm(shifted @ block.right[:, 0])
            for k in range(1, block.multiplicity):
                defect = max(
                    defect,
                    float(
                        np.linalg.norm(
                            shifted @ block.right[:, k] - block.right[:, k - 1]
                        )
                    ),
                )
            recursion_defect = max(
                recursion_defect, defect / max(1.0, float(np.linalg.norm(block.right)))
            )
        checks.append(_check("jordan_chain_recursion", recursion_defect, 1e-8))
    else:
        gram_set = infinite_subgramians(cr, spec, tols.solvability)
        inv_set = inverse_eigenparts(cr, spec, tols.solvability)

    gram_sum = gram_set.symmetrized().total().real
    checks.append(
        _check(
            "gramian_oracle_agreement",
            float(np.linalg.norm(gram_sum - reference.matrix)) / ref_norm,
            1e-8,
        )
    )
    checks.append(
        _check("lyapunov_residual", oracle.residual_lyapunov(a_c, bbt, gram_sum), 1e-8)
    )

    inv_sum = inv_set.symmetrized().total().real
    inv_reference = np.linalg.inv(reference.matrix)
    checks.append(
        _check(
            "inverse_oracle_agreement",
            float(np.linalg.norm(inv_sum - inv_reference))
            / max(1e-300, float(np.linalg.norm(inv_reference))),
            1e-7,
        )
    )
    checks.append(
        _check("riccati_residual", oracle.residual_riccati(a_c, b_c, inv_sum), 1e-7)
    )
    checks.append(
        _check(
            "inverse_product_identity",
            float(np.max(np.abs(inv_set.total() @ gram_set.total() - np.eye(n)))),
            1e-7,
        )
    )

    gram_merged = gram_set.symmetrized().merged_real().components.values()
    plaid_odd = max(zero_plaid_defect(m, alternation=True)[0] for m in gram_merged)
    plaid_alt = max(zero_plaid_defect(m, alternation=True)[1] for m in gram_merged)
    checks.append(_check("zero_plaid_zeros", plaid_odd, 1e-10))
    checks.append(_check("zero_plaid_alternation", plaid_alt, 1e-10))
    inv_plaid = max(
        zero_plaid_defect(m, alternation=False)[0]
        for m in inv_set.symmetrized().merged_real().components.values()
    )
    checks.append(_check("inverse_zero_plaid_zeros", inv_plaid, 1e-10))

    if not multiple:
        pair_set = infinite_pair_subgramians(cr, spec, tols.solvability).symmetrized()
        eigen_sym = gram_set.symmetrized()
        partition = 0.0
        for i in range(spec.values.size):
            row = sum(pair_set.components[(i, j)] for j in range(spec.values.size))
            partition = max(
                partition,
                float(np.max(np.abs(row - eigen_sym.components[i])))
                / max(1.0, float(np.max(np.abs(eigen_sym.components[i])))),
            )
        checks.append(_check("pair_partition", partition, 1e-9))

        certificate = orthogonality_certificate(gram_set, inv_set)
        checks.append(_check("orthogonality", certificate.max_violation, 1e-8))

        t_probe = 1.0
        closed_t = finite_subgramians(cr, spec, t_probe, tols.solvability).total().real
        rk4 = oracle.integrate_lyapunov(a_c, bbt, np.zeros((n, n)), t_probe, steps=10_000)
        checks.append(
            _check(
                "finite_rk4_agreement",
                float(np.linalg.norm(closed_t - rk4.matrix))
                / max(1.0, float(np.linalg.norm(rk4.matrix))),
                1e-6,
            )
        )

        p0_doc = doc.initial_condition
        p0 = (
            p0_doc
            if p0_doc is not None
            else (lambda s: 0.5 * (s + s.T))(rng.standard_normal((n, n)))
        )
        p0c = _companion_initial(p0, resolved)
        hom0 = homogeneous_decomposition(cr, spec, p0c, 0.0)[0]
        checks.append(
            _check(
                "homogeneous_initial_value",
                float(np.max(np.abs(sum(hom0.components.values()) - p0c.matrix)))
                / max(1.0, float(np.max(np.abs(p0c.matrix)))),
                1e-9,
            )
        )

        x0 = rng.standard_normal(n)
        partition_report = energy_partition(x0, inv_set)
        closure = max(
            abs(np.sum(partition_report.linear) - partition_report.total),
            abs(np.sum(partition_report.quadratic) - partition_report.total),
        ) / max(1.0, abs(partition_report.total))
        checks.append(_check("energy_partition_closure", closure, 1e-9))

    report = {
        "schema": 1,
        "command": "verify",
        "label": doc.label,
        "seed": seed,
        "system": {"n": n, "source": doc.source},
        "spectrum": _spectrum_json(spec),
        "solvability": _solvability_json(resolved.solvability),
        "checks": checks,
        "all_passed": all(c["pass"] for c in checks),
        "warnings": resolved.warnings,
    }
    return report


# ---------------------------------------------------------------------------
# energy


def cmd_energy(
    doc: SystemDocument,
    x0,
    tols: Tolerances = Tolerances(),
    time_series: tuple | None = None,
    seed: int | None = None,
) -> tuple:
    """Minimum-energy partition for target state x0.

    Returns (report, csv_text_or_None); the CSV holds the optimal control and
    its modal components when a stable time series was requested.
    """
    resolved = resolve_document(doc, tols)
    _require_solvable_or_raise(resolved)
    spec, cr = resolved.spectrum, resolved.cr
    if not spec.is_simple:
        raise MultipleEigenvalueError(
            "energy partitions are defined for simple spectra"
        )
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (cr.n,):
        raise ValueError(f"x0 must have length {cr.n}, got shape {x0.shape}")
    inv_set = inverse_eigenparts(cr, spec, tols.solvability)
    inv_pairs = inverse_pair_parts(cr, spec, tols.solvability)
    partition = energy_partition(x0, inv_set, inv_pairs)
    warnings = list(resolved.warnings)
    if not partition.interpretation_valid:
        warnings.append(
            "spectrum is not strictly stable: the quadratic forms are reported "
            "but do not measure control energy"
        )
    report = {
        "schema": 1,
        "command": "energy",
        "label": doc.label,
        "seed": seed,
        "system": {"n": cr.n, "source": doc.source},
        "spectrum": _spectrum_json(spec),
        "x0": x0.tolist(),
        "energy": {
            "total": partition.total,
            "linear": partition.linear.tolist(),
            "quadratic": partition.quadratic.tolist(),
            "interpretation_valid": partition.interpretation_valid,
        },
        "warnings": warnings,
    }

    csv_text = None
    if time_series is not None:
        if not spec.is_stable:
            report["warnings"] = report["warnings"] + [
                "time series skipped: optimal control requires a strictly stable spectrum"
            ]
        else:
            t0, t1, steps = time_series
            signal = optimal_control(x0, cr, spec)
            times = np.linspace(float(t0), float(t1), int(steps))
            modes = signal.modal(times)
            control = signal.control(times)
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            header = ["t", "u"]
            for i in range(spec.values.size):
                header += [f"re_u{i + 1}", f"im_u{i + 1}"]
            writer.writerow(header)
            for k, t in enumerate(times):
                row = [f"{t:.12g}", f"{control[k]:.12g}"]
                for i in range(spec.values.size):
                    row += [f"{modes[i, k].real:.12g}", f"{modes[i, k].imag:.12g}"]
                writer.writerow(row)
            csv_text = buffer.getvalue()
            report["energy"]["quadrature"] = control_energy_quadrature(signal)
    return report, csv_text


# ---------------------------------------------------------------------------
# roots


def cmd_roots(doc: SystemDocument, tols: Tolerances = Tolerances()) -> dict:
    """Spectrum pipeline only: polynomial, roots, clusters, solvability."""
    resolved = resolve_document(doc, tols)
    report = {
        "schema": 1,
        "command": "roots",
        "label": doc.label,
        "polynomial": resolved.poly.coeffs.tolist(),
        "spectrum": _spectrum_json(resolved.spectrum),
        "solvability": _solvability_json(resolved.solvability),
        "warnings": resolved.warnings,
    }
    if doc.source != "eigenvalues":
        roots = find_roots(resolved.poly, tols.root)
        report["roots"] = [{"re": float(r.real), "im": float(r.imag)} for r in roots]
    return report


# ---------------------------------------------------------------------------
# argument parsing and entry point


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors, which is reserved for
    solvability violations here; remap to the usage code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gramspec",
        description="Eigenvalue-indexed spectral decompositions of controllability "
        "Gramians and their inverses.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p):
        p.add_argument("system", help="system document (JSON)")
        p.add_argument("--tol-root", type=float, default=Tolerances().root)
        p.add_argument("--tol-cluster", type=float, default=Tolerances().cluster)
        p.add_argument("--tol-solve", type=float, default=Tolerances().solvability)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--output", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    analyze = sub.add_parser("analyze", help="spectral decompositions")
    add_common(analyze)
    analyze.add_argument("--pairs", action="store_true", help="emit pair-indexed components")
    analyze.add_argument("--finite", type=float, default=None, metavar="T",
                         help="also decompose the finite Gramian at horizon T")
    analyze.add_argument("--inverse", action="store_true",
                         help="also decompose the inverse Gramian")
    analyze.add_argument("--initial", default=None, metavar="P0_FILE",
                         help="initial condition (JSON array of rows)")
    analyze.add_argument("--raw", action="store_true",
                         help="emit raw components instead of symmetrized ones")

    verify = sub.add_parser("verify", help="check closed forms against oracles")
    add_common(verify)

    energy = sub.add_parser("energy", help="minimum-energy partitions")
    add_common(energy)
    energy.add_argument("--x0", required=True,
                        help="target state, comma-separated floats")
    energy.add_argument("--time-series", nargs=3, metavar=("T0", "T1", "STEPS"),
                        default=None, help="emit the optimal control as CSV")

    roots = sub.add_parser("roots", help="spectrum pipeline only")
    add_common(roots)
    return parser


def _load_document(path: str) -> SystemDocument:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise SchemaError("$", f"cannot read {path}: {exc}") from None
    return parse_system(text)


def _load_initial(path: str | None) -> np.ndarray | None:
    if path is None:
        return None
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError("initial_condition", f"cannot read {path}: {exc}") from None
    m = np.array(data, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SchemaError("initial_condition", "must be a square matrix")
    return m


def _emit(text: str, output: str | None):
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)


def _dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    tols = Tolerances(root=args.tol_root, cluster=args.tol_cluster, solvability=args.tol_solve)
    try:
        doc = _load_document(args.system)
        if args.command == "analyze":
            report = cmd_analyze(
                doc,
                tols,
                pairs=args.pairs,
                finite=args.finite,
                inverse=args.inverse,
                initial=_load_initial(args.initial),
                raw=args.raw,
                seed=args.seed,
            )
            _emit(_dump_report(report), args.output)
            return EXIT_OK
        if args.command == "verify":
            report = cmd_verify(doc, tols, seed=args.seed)
            _emit(_dump_report(report), args.output)
            for check in report["checks"]:
                status = "PASS" if check["pass"] else "FAIL"
                sys.stderr.write(
                    f"{status} {check['name']}: {check['value']:.3e} "
                    f"(tolerance {check['tolerance']:.1e})\n"
                )
            return EXIT_OK if report["all_passed"] else EXIT_VERIFY_FAILED
        if args.command == "energy":
            x0 = [float(v) for v in args.x0.split(",")]
            series = None
            if args.time_series is not None:
                series = (float(args.time_series[0]), float(args.time_series[1]),
                          int(args.time_series[2]))
                if args.format == "csv" and args.output is None:
                    raise ValueError("--time-series with csv format requires --output")
            report, csv_text = cmd_energy(doc, x0, tols, time_series=series, seed=args.seed)
            if csv_text is not None and args.format == "csv":
                _emit(csv_text, args.output)
                sys.stderr.write(_dump_report(report))
            else:
                _emit(_dump_report(report), args.output)
            return EXIT_OK
        if args.command == "roots":
            report = cmd_roots(doc, tols)
            _emit(_dump_report(report), args.output)
            return EXIT_OK
        parser.error(f"unknown command {args.command}")
    except SchemaError as exc:
        sys.stderr.write(f"schema error: {exc}\n")
        return EXIT_USAGE
    except SolvabilityError as exc:
        sys.stderr.write(f"solvability error: {exc}\n")
        return EXIT_SOLVABILITY
    except (ControllabilityError, ConditioningError, ConvergenceError,
            MultipleEigenvalueError) as exc:
        sys.stderr.write(f"conditioning error: {exc}\n")
        return EXIT_CONDITIONING
    except (ValueError, GramspecError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
