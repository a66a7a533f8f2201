"""Coefficient families of products of uniform powers.

Everything here works in two arithmetics.  When every input is an ``int`` or
:class:`fractions.Fraction` (or ``mode="exact"`` is requested) the results are
exact rationals; otherwise they are floats and sums use compensated
summation (:func:`math.fsum`).

The coefficients blow up with alternating signs as exponents cluster.  In
float mode a relative gap below ``min_gap`` is refused rather than silently
cancelled; callers should merge such exponents into a multiplicity of a
:class:`BetaMultiset` and use :func:`randintegral.product_law.build_law`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from .errors import InvalidInputError

DEFAULT_MIN_GAP = 1e-9

_ITEM_RE = re.compile(r"^\s*([^x\s]+)\s*(?:x\s*(\S+))?\s*$")


def is_rational(value) -> bool:
    return isinstance(value, Rational) and not isinstance(value, bool)


def _coerce(values: Iterable, mode: str | None) -> tuple[list, bool]:
    values = list(values)
    if mode is None:
        exact = all(is_rational(v) for v in values)
    elif mode == "exact":
        exact = True
    elif mode == "float":
        exact = False
    else:
        raise InvalidInputError(f"unknown arithmetic mode {mode!r}; use 'float' or 'exact'")
    if exact:
        return [Fraction(v) for v in values], True
    return [float(v) for v in values], False


def _total(values, exact: bool):
    if exact:
        return sum(values, Fraction(0))
    return math.fsum(values)


def _check_distinct(values: Sequence, exact: bool, min_gap: float, *, positive: bool = True) -> None:
    if not values:
        raise InvalidInputError("at least one exponent is required")
    for v in values:
        if positive and not v > 0:
            raise InvalidInputError(f"exponent {v} is not positive")
        if not exact and not math.isfinite(v):
            raise InvalidInputError(f"exponent {v} is not finite")
    ordered = sorted(values)
    for lo, hi in zip(ordered, ordered[1:]):
        if lo == hi:
            raise InvalidInputError(f"duplicate exponent {lo}")
        if not exact and (hi - lo) < min_gap * max(abs(lo), abs(hi)):
            raise InvalidInputError(
                f"exponents {lo!r} and {hi!r} are closer than relative gap {min_gap:g}; "
                "merge them into a multiplicity of a BetaMultiset instead"
            )


@dataclass(frozen=True)
class BetaMultiset:
    """Finite multiset of positive exponents.

    ``entries`` holds ``(value, multiplicity)`` pairs in ascending order of
    value.  Values are all :class:`~fractions.Fraction` when every input was
    rational, otherwise all floats.  Construction canonicalizes, so any
    permutation of the same expanded list produces an equal object.
    """

    entries: tuple

    def __post_init__(self):
        pairs = [(v, m) for v, m in self.entries]
        if not pairs:
            raise InvalidInputError("a BetaMultiset needs at least one exponent")
        for v, m in pairs:
            if isinstance(m, bool) or not isinstance(m, int) or m < 1:
                raise InvalidInputError(f"multiplicity {m!r} of exponent {v} must be a positive integer")
        values, exact = _coerce([v for v, _ in pairs], None)
        for v in values:
            if not v > 0 or (not exact and not math.isfinite(v)):
                raise InvalidInputError(f"exponent {v} is not a positive finite number")
        merged: dict = {}
        for v, (_, m) in zip(values, pairs):
            merged[v] = merged.get(v, 0) + m
        object.__setattr__(self, "entries", tuple(sorted(merged.items())))

    @classmethod
    def from_values(cls, values: Iterable) -> "BetaMultiset":
        """Build from an expanded list such as ``[1, 2, 2]``."""
        return cls(tuple((v, 1) for v in values))

    @classmethod
    def of(cls, *values) -> "BetaMultiset":
        return cls.from_values(values)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "BetaMultiset":
        return cls(tuple((v, int(m)) for v, m in pairs))

    @classmethod
    def parse(cls, text: str, mode: str | None = None) -> "BetaMultiset":
        """Parse the shell grammar ``"1,2,3"`` or ``"2x3"`` (value ``x`` multiplicity).

        Decimal literals become exact rationals unless ``mode="float"``.
        """
        if not text or not text.strip():
            raise InvalidInputError("empty exponent multiset")
        pairs = []
        for item in text.split(","):
            match = _ITEM_RE.match(item)
            if match is None:
                raise InvalidInputError(f"cannot parse multiset item {item!r} in {text!r}")
            raw_value, raw_mult = match.groups()
            try:
                value = Fraction(raw_value)
            except (ValueError, ZeroDivisionError):
                raise InvalidInputError(f"cannot parse exponent {raw_value!r}") from None
            if mode == "float":
                value = float(value)
            mult = 1
            if raw_mult is not None:
                if not re.fullmatch(r"[0-9]+", raw_mult):
                    raise InvalidInputError(f"multiplicity {raw_mult!r} must be a positive integer")
                mult = int(raw_mult)
            pairs.append((value, mult))
        return cls.from_pairs(pairs)

    @property
    def values(self) -> tuple:
        return tuple(v for v, _ in self.entries)

    @property
    def multiplicities(self) -> tuple:
        return tuple(m for _, m in self.entries)

    @property
    def size(self) -> int:
        return sum(self.multiplicities)

    @property
    def exact(self) -> bool:
        return isinstance(self.entries[0][0], Fraction)

    @property
    def is_distinct(self) -> bool:
        return all(m == 1 for m in self.multiplicities)

    def expanded(self) -> tuple:
        return tuple(v for v, m in self.entries for _ in range(m))

    def union(self, other: "BetaMultiset") -> "BetaMultiset":
        return BetaMultiset(self.entries + other.entries)

    def scaled(self, factor) -> "BetaMultiset":
        """Multiset of ``value / factor``: the law of ``X**factor`` when X has this law."""
        return BetaMultiset(tuple((v / factor, m) for v, m in self.entries))

    def __contains__(self, value) -> bool:
        return any(v == value for v in self.values)

    def __str__(self) -> str:
        # the inverse of ``parse``: integral floats print without ".0"
        parts = []
        for v, m in self.entries:
            text = str(int(v)) if isinstance(v, float) and v.is_integer() else str(v)
            parts.append(f"{text}x{m}" if m > 1 else text)
        return ",".join(parts)


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients aligned index-for-index with ``exponents``."""

    values: tuple
    exponents: tuple

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, index):
        return self.values[index]

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values)

    def total(self):
        return _total(self.values, self.exact)

    def as_floats(self) -> list[float]:
        return [float(v) for v in self.values]


def big_C(betas: Sequence, mode: str | None = None, min_gap: float = DEFAULT_MIN_GAP) -> CoefficientVector:
    """Weights ``C_j = prod_{k != j} beta_k / (beta_k - beta_j)``.

    These are the mixture weights of the time change for distinct exponents
    and they always sum to one.

    >>> big_C([1, 2, 3]).values
    (Fraction(3, 1), Fraction(-3, 1), Fraction(1, 1))
    """
    vals, exact = _coerce(betas, mode)
    _check_distinct(vals, exact, min_gap)
    out = []
    for j, bj in enumerate(vals):
        out.append(_product(
            (bk / (bk - bj) for k, bk in enumerate(vals) if k != j), exact))
    return CoefficientVector(tuple(out), tuple(vals))


def little_c(betas: Sequence, mode: str | None = None, min_gap: float = DEFAULT_MIN_GAP) -> CoefficientVector:
    """Weights ``c_j = prod_{k != j} 1 / (beta_k - beta_j)``."""
    vals, exact = _coerce(betas, mode)
    _check_distinct(vals, exact, min_gap)
    out = []
    for j, bj in enumerate(vals):
        out.append(_product(
            (1 / (bk - bj) for k, bk in enumerate(vals) if k != j), exact))
    return CoefficientVector(tuple(out), tuple(vals))


def d_coeff(betas: Sequence, alpha, l: int, mode: str | None = None,
            min_gap: float = DEFAULT_MIN_GAP) -> CoefficientVector:
    """``d_j^(l) = C_j * (alpha / (alpha - beta_j))**l`` for a repeated block ``alpha``."""
    if isinstance(l, bool) or not isinstance(l, int) or l < 0:
        raise InvalidInputError(f"power l={l!r} must be a nonnegative integer")
    vals, exact = _coerce(list(betas) + [alpha], mode)
    alpha = vals.pop()
    if not alpha > 0:
        raise InvalidInputError(f"alpha={alpha} is not positive")
    if alpha in vals:
        raise InvalidInputError(f"alpha={alpha} coincides with an exponent in betas")
    _check_distinct(vals + [alpha], exact, min_gap)
    C = big_C(vals, min_gap=min_gap)
    out = tuple(c * (alpha / (alpha - b)) ** l for c, b in zip(C.values, vals))
    return CoefficientVector(out, tuple(vals))


def pochhammer(w, m: int):
    """Rising factorial ``w (w+1) ... (w+m-1)`` with ``(w)_0 = 1``."""
    if m < 0:
        raise InvalidInputError(f"Pochhammer length {m} must be nonnegative")
    out = 1
    for i in range(m):
        out *= w + i
    return out


def e_coeff(k: int, l: int) -> list[int]:
    """Coefficients ``e_{r,k+l}`` for ``r = 1 .. k+l-1`` of the two-block law.

    ``e_{r,k+l} = sum_{s=1}^{min(r,k)} (-1)^s (s)_{r-s}/(r-s)! * (l)_{k-s}/(k-s)!``.
    Every entry is an integer.
    """
    for name, value in (("k", k), ("l", l)):
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise InvalidInputError(f"{name}={value!r} must be a positive integer")
    out = []
    for r in range(1, k + l):
        acc = Fraction(0)
        for s in range(1, min(r, k) + 1):
            acc += (-1) ** s * Fraction(pochhammer(s, r - s), math.factorial(r - s)) \
                * Fraction(pochhammer(l, k - s), math.factorial(k - s))
        out.append(int(acc))
    return out


def two_block_bracket(k: int, l: int, alpha, gamma, mode: str | None = None):
    """Total mass of the two-block expansion; identically one.

    Evaluates the two-block CDF formula at ``t = 1`` where every repeated
    law equals one.  Exact for rational ``alpha`` and ``gamma``.
    """
    (alpha, gamma), exact = _coerce([alpha, gamma], mode)
    if not (alpha > 0 and gamma > 0) or alpha == gamma:
        raise InvalidInputError("alpha and gamma must be distinct positive numbers")
    first = [Fraction(pochhammer(l, k - s), math.factorial(k - s)) * ((alpha - gamma) / alpha) ** s
             for s in range(1, k + 1)]
    second = [e * ((gamma - alpha) / gamma) ** r for r, e in enumerate(e_coeff(k, l), start=1)]
    if not exact:
        first = [float(v) for v in first]
        second = [float(v) for v in second]
    bracket = _total(first, exact) - _total(second, exact)
    return (alpha / (alpha - gamma)) ** k * (gamma / (gamma - alpha)) ** l * bracket


def rho(multiset: BetaMultiset, b=None):
    """``rho(b) = prod_{c != b} c / (c - b)`` over the multiset, with multiplicity.

    Returns a dict keyed by distinct value, or the single value at ``b``.
    For an all-distinct multiset this coincides with :func:`big_C`.
    """
    entries = multiset.entries
    out = {}
    for b_val, _ in entries:
        factors = [(c / (c - b_val)) ** m for c, m in entries if c != b_val]
        out[b_val] = _product(factors, multiset.exact)
    if b is None:
        return out
    for key, value in out.items():
        if key == b:
            return value
    raise InvalidInputError(f"{b} is not an element of the multiset {multiset}")


def lagrange_terms(zs: Sequence[complex], z: complex) -> list[complex]:
    zs = [complex(v) for v in zs]
    if not zs:
        raise InvalidInputError("at least one node is required")
    for i, zi in enumerate(zs):
        for zk in zs[i + 1:]:
            if zi == zk:
                raise InvalidInputError(f"duplicate node {zi}")
    z = complex(z)
    terms = []
    for i, zi in enumerate(zs):
        p = 1 + 0j
        for k, zk in enumerate(zs):
            if k != i:
                p *= (zk - z) / (zk - zi)
        terms.append(p)
    return terms


def lagrange_identity_residual(zs: Sequence[complex], z: complex) -> float:
    """``|sum_i prod_{k != i} (z_k - z)/(z_k - z_i) - 1|``, zero in exact arithmetic."""
    terms = lagrange_terms(zs, z)
    re_part = math.fsum([t.real for t in terms] + [-1.0])
    im_part = math.fsum(t.imag for t in terms)
    return abs(complex(re_part, im_part))


def _product(factors, exact: bool):
    out = Fraction(1) if exact else 1.0
    for f in factors:
        out *= f
    return out
