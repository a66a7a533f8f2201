"""JSON documents describing Levy-Khintchine triples.

Schema (all keys except ``timechange`` are required)::

    {
      "dim": 1,
      "shift": [0.2],
      "covariance": [1.0],               # row-major, d*d numbers (nested rows also accepted)
      "atoms": [[[1.5], 0.8]],           # [[point...], mass] pairs
      "timechange": {"multiset": [[1, 1], [2, 1]]}
    }

``timechange`` marks a transformed measure: the atoms are the base measure
and every atom is spread along its segment by the product law of the
multiset.  Multiset values may be numbers or rational strings such as
``"1/2"``.  Validation errors name the offending field path.
"""

from __future__ import annotations

import json
from fractions import Fraction
from numbers import Real

import numpy as np

from .coefficients import BetaMultiset
from .errors import InvalidInputError
from .levy_core import MAX_DIM, FiniteAtomic, LevyTriple, Transformed
from .product_law import build_law

TOP_KEYS = {"dim", "shift", "covariance", "atoms", "timechange"}


class TripleSchemaError(InvalidInputError):
    """Schema violation at ``path`` (e.g. ``atoms[1][0]``)."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise TripleSchemaError(path, f"expected a number, got {json.dumps(value)}")
    value = float(value)
    if not np.isfinite(value):
        raise TripleSchemaError(path, "must be finite")
    return value


def _vector(value, length: int, path: str) -> list[float]:
    if not isinstance(value, list):
        raise TripleSchemaError(path, "expected a list of numbers")
    if len(value) != length:
        raise TripleSchemaError(path, f"expected {length} entries, got {len(value)}")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _covariance(value, d: int) -> np.ndarray:
    if isinstance(value, list) and value and all(isinstance(row, list) for row in value):
        if len(value) != d:
            raise TripleSchemaError("covariance", f"expected {d} rows, got {len(value)}")
        rows = [_vector(row, d, f"covariance[{i}]") for i, row in enumerate(value)]
        return np.array(rows)
    return np.array(_vector(value, d * d, "covariance")).reshape(d, d)


def _exponent(value, path: str):
    if isinstance(value, bool):
        raise TripleSchemaError(path, "expected a positive exponent")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            pass
    raise TripleSchemaError(path, f"expected a positive exponent, got {json.dumps(value)}")


def _multiset(value) -> BetaMultiset:
    path = "timechange"
    if not isinstance(value, dict) or set(value) != {"multiset"}:
        raise TripleSchemaError(path, 'expected {"multiset": [[value, multiplicity], ...]}')
    entries = value["multiset"]
    if not isinstance(entries, list) or not entries:
        raise TripleSchemaError(f"{path}.multiset", "expected a nonempty list")
    pairs = []
    for i, item in enumerate(entries):
        where = f"{path}.multiset[{i}]"
        if not isinstance(item, list) or len(item) != 2:
            raise TripleSchemaError(where, "expected [value, multiplicity]")
        v = _exponent(item[0], f"{where}[0]")
        if any(v == seen for seen, _ in pairs):
            raise TripleSchemaError(f"{where}[0]", f"value {item[0]} is listed twice")
        m = item[1]
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise TripleSchemaError(f"{where}[1]", "multiplicity must be a positive integer")
        pairs.append((v, m))
    try:
        return BetaMultiset.from_pairs(pairs)
    except InvalidInputError as exc:
        raise TripleSchemaError(f"{path}.multiset", str(exc)) from None


def triple_from_dict(doc) -> LevyTriple:
    if not isinstance(doc, dict):
        raise TripleSchemaError("", "top level must be an object")
    unknown = sorted(set(doc) - TOP_KEYS)
    if unknown:
        raise TripleSchemaError(unknown[0], "unknown field")
    for key in ("dim", "shift", "covariance", "atoms"):
        if key not in doc:
            raise TripleSchemaError(key, "missing required field")
    d = doc["dim"]
    if isinstance(d, bool) or not isinstance(d, int) or not 1 <= d <= MAX_DIM:
        raise TripleSchemaError("dim", f"must be an integer between 1 and {MAX_DIM}")
    shift = np.array(_vector(doc["shift"], d, "shift"))
    cov = _covariance(doc["covariance"], d)
    atoms = doc["atoms"]
    if not isinstance(atoms, list):
        raise TripleSchemaError("atoms", "expected a list of [point, mass] pairs")
    points, masses = [], []
    for i, atom in enumerate(atoms):
        if not isinstance(atom, list) or len(atom) != 2:
            raise TripleSchemaError(f"atoms[{i}]", "expected [point, mass]")
        point = _vector(atom[0], d, f"atoms[{i}][0]")
        if not any(point):
            raise TripleSchemaError(f"atoms[{i}][0]", "a Levy measure cannot charge the origin")
        mass = _number(atom[1], f"atoms[{i}][1]")
        if not mass > 0:
            raise TripleSchemaError(f"atoms[{i}][1]", "mass must be positive")
        points.append(point)
        masses.append(mass)
    measure = FiniteAtomic(np.array(points).reshape(len(points), d), np.array(masses))
    if "timechange" in doc:
        measure = Transformed(measure, build_law(_multiset(doc["timechange"])))
    try:
        return LevyTriple(shift, cov, measure)
    except InvalidInputError as exc:
        raise TripleSchemaError("covariance", str(exc)) from None


def parse_triple(text: str) -> LevyTriple:
    """Parse a JSON document; syntax errors report line and column."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TripleSchemaError("", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return triple_from_dict(doc)


def load_triple(path) -> LevyTriple:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInputError(f"cannot read triple file {path}: {exc.strerror}") from None
    return parse_triple(text)


def _exponent_json(value):
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else str(value)
    return float(value)


def triple_to_dict(triple: LevyTriple) -> dict:
    M = triple.measure
    base = M.base if isinstance(M, Transformed) else M
    doc = {
        "dim": triple.dim,
        "shift": [float(v) for v in triple.shift],
        "covariance": [float(v) for v in triple.covariance.ravel()],
        "atoms": [[[float(v) for v in p], float(m)] for p, m in zip(base.points, base.masses)],
    }
    if isinstance(M, Transformed):
        source = M.timechange.source
        doc["timechange"] = {"multiset": [[_exponent_json(v), m] for v, m in source.entries]}
    return doc


def dump_triple(triple: LevyTriple, indent: int | None = 2) -> str:
    return json.dumps(triple_to_dict(triple), indent=indent)
