"""System document schema: parsing, validation and serialization.

A document describes the system under analysis in exactly one of three ways:
state-space matrices, monic characteristic-polynomial coefficients, or an
explicit eigenvalue list with multiplicities.  An optional symmetric initial
condition and a label may ride along.  Serialization is plain JSON with
sorted keys; complex numbers never appear (eigenvalues are (re, im,
multiplicity) triples).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import SchemaError
from .spectrum import Spectrum

SCHEMA_VERSION = 1
_SOURCES = ("matrices", "char_poly", "eigenvalues")


@dataclass(frozen=True)
class SystemDocument:
    """Validated system description; exactly one source field is set."""

    matrices: tuple | None = None  # (A, B) as float arrays
    char_poly: np.ndarray | None = None  # ascending monic coefficients
    eigenvalues: list | None = None  # [(complex, multiplicity), ...]
    initial_condition: np.ndarray | None = None
    label: str | None = None

    @property
    def source(self) -> str:
        if self.matrices is not None:
            return "matrices"
        if self.char_poly is not None:
            return "char_poly"
        return "eigenvalues"

    @property
    def n(self) -> int:
        if self.matrices is not None:
            return self.matrices[0].shape[0]
        if self.char_poly is not None:
            return self.char_poly.size - 1
        return int(sum(mult for _, mult in self.eigenvalues))

    def spectrum(self) -> Spectrum | None:
        """The explicit spectrum, when the document carries one."""
        if self.eigenvalues is None:
            return None
        values = np.array([lam for lam, _ in self.eigenvalues])
        mults = np.array([mult for _, mult in self.eigenvalues])
        return Spectrum(values, mults)

    def to_dict(self) -> dict:
        out: dict = {"schema": SCHEMA_VERSION}
        if self.label is not None:
            out["label"] = self.label
        if self.matrices is not None:
            a, b = self.matrices
            out["matrices"] = {"A": a.tolist(), "B": b.tolist()}
        if self.char_poly is not None:
            out["char_poly"] = self.char_poly.tolist()
        if self.eigenvalues is not None:
            out["eigenvalues"] = [
                [float(lam.real), float(lam.imag), int(mult)] for lam, mult in self.eigenvalues
            ]
        if self.initial_condition is not None:
            out["initial_condition"] = self.initial_condition.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _as_float_matrix(raw, path: str) -> np.ndarray:
    try:
        m = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"not a numeric matrix: {exc}") from None
    if m.ndim != 2:
        raise SchemaError(path, f"expected a matrix (list of rows), got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise SchemaError(path, "entries must be finite")
    return m


def _parse_matrices(raw, path: str):
    if not isinstance(raw, dict) or set(raw) != {"A", "B"}:
        raise SchemaError(path, "must be an object with exactly the keys 'A' and 'B'")
    a = _as_float_matrix(raw["A"], f"{path}.A")
    if a.shape[0] != a.shape[1]:
        raise SchemaError(f"{path}.A", f"must be square, got shape {a.shape}")
    b = _as_float_matrix(raw["B"], f"{path}.B")
    if b.shape[0] != a.shape[0]:
        raise SchemaError(f"{path}.B", f"must have {a.shape[0]} rows, got {b.shape[0]}")
    return a, b


def _parse_char_poly(raw, path: str) -> np.ndarray:
    try:
        coeffs = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(path, f"not a numeric list: {exc}") from None
    if coeffs.ndim != 1 or coeffs.size < 2:
        raise SchemaError(path, "must be a flat list of at least two coefficients")
    if not np.all(np.isfinite(coeffs)):
        raise SchemaError(path, "coefficients must be finite")
    if coeffs[-1] != 1.0:
        raise SchemaError(path, f"must be monic (last coefficient 1), got {coeffs[-1]}")
    return coeffs


def _parse_eigenvalues(raw, path: str) -> list:
    if not isinstance(raw, list) or not raw:
        raise SchemaError(path, "must be a non-empty list of [re, im, multiplicity] triples")
    entries = []
    for k, item in enumerate(raw):
        p = f"{path}[{k}]"
        if not isinstance(item, (list, tuple)) or len(item) != 3:
            raise SchemaError(p, "must be a [re, im, multiplicity] triple")
        re, im, mult = item
        if not isinstance(mult, int) or isinstance(mult, bool) or mult < 1:
            raise SchemaError(f"{p}[2]", f"multiplicity must be a positive integer, got {mult!r}")
        try:
            lam = complex(float(re), float(im))
        except (TypeError, ValueError):
            raise SchemaError(p, "re and im must be numbers") from None
        entries.append((lam, mult))
    # conjugate closure keeps the implied system matrices real
    for lam, mult in entries:
        if lam.imag != 0.0 and (np.conj(lam), mult) not in entries:
            raise SchemaError(
                path,
                f"complex eigenvalue {lam} needs its conjugate with the same multiplicity",
            )
    return entries


def parse_system(text_or_mapping) -> SystemDocument:
    """Parse and validate a system document from JSON text or a mapping.

    Raises SchemaError with the offending field path.
    """
    if isinstance(text_or_mapping, (str, bytes)):
        try:
            data = json.loads(text_or_mapping)
        except json.JSONDecodeError as exc:
            raise SchemaError("$", f"invalid JSON: {exc}") from None
    else:
        data = text_or_mapping
    if not isinstance(data, dict):
        raise SchemaError("$", "document must be a JSON object")

    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise SchemaError("schema", f"unsupported schema version {schema!r}")

    known = set(_SOURCES) | {"schema", "label", "initial_condition"}
    for key in data:
        if key not in known:
            raise SchemaError(key, "unknown field")

    present = [key for key in _SOURCES if key in data]
    if len(present) != 1:
        raise SchemaError(
            "$", f"exactly one of {_SOURCES} must be present, got {present or 'none'}"
        )

    matrices = char_poly = eigenvalues = None
    if present[0] == "matrices":
        matrices = _parse_matrices(data["matrices"], "matrices")
        n = matrices[0].shape[0]
    elif present[0] == "char_poly":
        char_poly = _parse_char_poly(data["char_poly"], "char_poly")
        n = char_poly.size - 1
    else:
        eigenvalues = _parse_eigenvalues(data["eigenvalues"], "eigenvalues")
        n = sum(mult for _, mult in eigenvalues)

    initial = None
    if "initial_condition" in data:
        initial = _as_float_matrix(data["initial_condition"], "initial_condition")
        if initial.shape != (n, n):
            raise SchemaError(
                "initial_condition", f"must be {n}x{n} to match the system, got {initial.shape}"
            )
        scale = max(1.0, float(np.max(np.abs(initial))))
        if np.max(np.abs(initial - initial.T)) > 1e-12 * scale:
            raise SchemaError("initial_condition", "must be symmetric")

    label = data.get("label")
    if label is not None and not isinstance(label, str):
        raise SchemaError("label", "must be a string")

    return SystemDocument(
        matrices=matrices,
        char_poly=char_poly,
        eigenvalues=eigenvalues,
        initial_condition=initial,
        label=label,
    )
