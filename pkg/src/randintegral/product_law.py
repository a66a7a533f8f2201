"""Closed-form laws of ``U_1**(1/b_1) * ... * U_K**(1/b_K)``.

A :class:`ClosedFormLaw` is a density on ``(0, 1]`` of the form

    f(x) = sum_i c_i * x**(e_i - 1) * (-log x)**j_i

This family is closed under mixing in one more independent factor
``U**(1/b)``, which is how :func:`build_law` produces the exact law of any
exponent multiset.  The CDF of a genuine law is the time change ``r_A`` of
the composed random-integral mapping.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import integrate, special

from . import streams
from .coefficients import (
    DEFAULT_MIN_GAP,
    BetaMultiset,
    _check_distinct,
    big_C,
    d_coeff,
    e_coeff,
    pochhammer,
)
from .errors import DomainError, InvalidInputError, UnsupportedError

TINY = float(np.nextafter(0.0, 1.0))


def _horner_exp_sum(x, j: int):
    """``sum_{k=0}^{j} x**k / k!`` evaluated stably by nested multiplication."""
    acc = np.ones_like(x)
    for k in range(j, 0, -1):
        acc = 1.0 + acc * x / k
    return acc


@dataclass(frozen=True)
class ClosedFormLaw:
    """Signed combination of ``c * x**(e-1) * (-log x)**j`` on ``(0, 1]``.

    Parameters
    ----------
    terms : tuple of (coef, exponent, logpow)
        Merged on construction so each ``(exponent, logpow)`` appears once.
    source : BetaMultiset or None
        Set only when the density is the genuine law of that multiset.
    """

    terms: tuple
    source: BetaMultiset | None = None

    def __post_init__(self):
        merged: dict = defaultdict(int)
        for coef, exponent, logpow in self.terms:
            if isinstance(logpow, bool) or not isinstance(logpow, int) or logpow < 0:
                raise InvalidInputError(f"log power {logpow!r} must be a nonnegative integer")
            if exponent == 0:
                raise InvalidInputError("term exponents must be nonzero")
            merged[(exponent, logpow)] += coef
        terms = tuple((c, e, j) for (e, j), c in sorted(merged.items()) if c != 0)
        object.__setattr__(self, "terms", terms)
        if self.source is not None and any(e <= 0 for _, e, _ in terms):
            raise InvalidInputError("a genuine product law cannot carry non-positive exponents")

    @property
    def genuine(self) -> bool:
        return self.source is not None

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) and isinstance(e, Fraction) for c, e, _ in self.terms)

    def tagged(self, source: BetaMultiset) -> "ClosedFormLaw":
        return ClosedFormLaw(self.terms, source)

    def as_dict(self) -> dict:
        return {(e, j): c for c, e, j in self.terms}

    @cached_property
    def _arrays(self):
        coef = np.array([float(c) for c, _, _ in self.terms])
        expo = np.array([float(e) for _, e, _ in self.terms])
        logp = np.array([j for _, _, j in self.terms], dtype=int)
        return coef, expo, logp

    def pdf(self, x):
        """Density at ``x`` in ``(0, 1]``; may be unbounded as ``x -> 0``."""
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0)) or np.any(x > 1):
            raise DomainError("density is defined on (0, 1] only")
        out = np.zeros_like(x)
        lx = -np.log(x)
        for c, e, j in zip(*self._arrays):
            out = out + c * x ** (e - 1.0) * lx ** j
        return out if out.ndim else float(out)

    def cdf(self, t):
        """Term-wise antiderivative; clamped to 0 below 0 and to the total mass above 1."""
        t = np.asarray(t, dtype=float)
        inside = (t > 0) & (t < 1)
        tt = np.where(inside, t, 0.5)
        acc = np.zeros_like(tt)
        lt = -np.log(tt)
        for c, e, j in zip(*self._arrays):
            acc = acc + c * math.factorial(j) / e ** (j + 1) * tt ** e * _horner_exp_sum(e * lt, j)
        top = 1.0 if self.genuine else float(self.total_mass())
        out = np.where(inside, acc, np.where(t >= 1, top, 0.0))
        return out if out.ndim else float(out)

    def total_mass(self):
        """``integral of the density over (0, 1]``; exact for rational terms."""
        parts = [c * math.factorial(j) / e ** (j + 1) for c, e, j in self.terms]
        if self.exact:
            return sum(parts, Fraction(0))
        return math.fsum(float(p) for p in parts)

    def partial_moment(self, k: float, u):
        """``integral_0^u s**k f(s) ds`` for ``u`` in ``[0, 1]``."""
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        pos = u > 0
        uu = np.where(pos, u, 1.0)
        acc = np.zeros_like(uu)
        lu = -np.log(uu)
        for c, e, j in zip(*self._arrays):
            ek = e + k
            if ek <= 0:
                raise DomainError(f"moment of order {k} diverges for exponent {e}")
            acc = acc + c * math.factorial(j) / ek ** (j + 1) * uu ** ek * _horner_exp_sum(ek * lu, j)
        out = np.where(pos, acc, 0.0)
        return out if out.ndim else float(out)

    def moment(self, k):
        """``E[T**k]``; exact when the terms and ``k`` are rational."""
        parts = []
        for c, e, j in self.terms:
            if e + k <= 0:
                raise DomainError(f"moment of order {k} diverges for exponent {e}")
            parts.append(c * math.factorial(j) / (e + k) ** (j + 1))
        if self.exact and isinstance(k, (int, Fraction)):
            return sum(parts, Fraction(0))
        return math.fsum(float(p) for p in parts)

    def __add__(self, other: "ClosedFormLaw") -> "ClosedFormLaw":
        return ClosedFormLaw(self.terms + other.terms)

    def __sub__(self, other: "ClosedFormLaw") -> "ClosedFormLaw":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "ClosedFormLaw":
        return ClosedFormLaw(tuple((scalar * c, e, j) for c, e, j in self.terms))

    def __neg__(self):
        return (-1) * self


def _mix(terms: dict, b) -> dict:
    """Density of ``X * U**(1/b)`` given the term dict of X's density.

    Uses ``f_new(z) = b z**(b-1) int_z^1 f(t) t**(-b) dt`` with each term
    integral in closed form.
    """
    out: dict = defaultdict(int)
    for (e, j), c in terms.items():
        a = e - b
        if a == 0:
            out[(b, j + 1)] += c * b / (j + 1)
            continue
        scale = c * b * math.factorial(j)
        out[(b, 0)] += scale / a ** (j + 1)
        for k in range(j + 1):
            out[(e, k)] -= scale * a ** (k - j - 1) / math.factorial(k)
    return {key: c for key, c in out.items() if c != 0}



def build_law(multiset, min_gap: float = DEFAULT_MIN_GAP) -> ClosedFormLaw:
    """Exact density of the product of uniform powers for ``multiset``.

    Factors are mixed in one at a time with :func:`_mix`.  A
    :class:`BetaMultiset` is mixed in canonical order; a plain sequence is
    mixed in the order given, which only affects floating-point rounding.

    >>> build_law(BetaMultiset.of(1, 2)).terms
    ((Fraction(2, 1), Fraction(1, 1), 0), (Fraction(-2, 1), Fraction(2, 1), 0))
    """
    if isinstance(multiset, BetaMultiset):
        order = multiset.expanded()
    else:
        order = list(multiset)
        multiset = BetaMultiset.from_values(order)
        cast = Fraction if multiset.exact else float
        order = [cast(v) for v in order]
    _check_distinct(list(multiset.values), multiset.exact, min_gap)
    first, *rest = order
    terms = {(first, 0): first}
    for b in rest:
        terms = _mix(terms, b)
    return ClosedFormLaw(tuple((c, e, j) for (e, j), c in terms.items()), multiset)


def _as_multiset(multiset) -> BetaMultiset:
    if isinstance(multiset, BetaMultiset):
        return multiset
    return BetaMultiset.from_values(multiset)


def pdf(law: ClosedFormLaw, x):
    return law.pdf(x)


def cdf(law: ClosedFormLaw, t):
    return law.cdf(t)


# -- the explicit case formulas; used as oracles against build_law ----------

def repeated_law(alpha, m: int) -> ClosedFormLaw:
    """``alpha x**(alpha-1) (-alpha log x)**(m-1) / (m-1)!``.

    Negative ``alpha`` gives the auxiliary (non-probability) function of the
    same shape; only positive ``alpha`` is tagged as a genuine law.
    """
    if m < 1:
        raise InvalidInputError(f"multiplicity {m} must be positive")
    coef = alpha ** m / math.factorial(m - 1)
    if isinstance(alpha, (int, Fraction)):
        coef = Fraction(alpha) ** m / math.factorial(m - 1)
        alpha = Fraction(alpha)
    source = BetaMultiset(((alpha, m),)) if alpha > 0 else None
    return ClosedFormLaw(((coef, alpha, m - 1),), source)


def repeated_cdf(alpha, m: int, t):
    """``t**alpha sum_{j<m} (-alpha log t)**j / j!`` on ``(0, 1]``, any nonzero ``alpha``."""
    t = np.asarray(t, dtype=float)
    alpha = float(alpha)
    return t ** alpha * _horner_exp_sum(-alpha * np.log(t), m - 1)


def distinct_law(alphas: Sequence, mode: str | None = None) -> ClosedFormLaw:
    """``sum_j C_j alpha_j x**(alpha_j - 1)`` for distinct exponents."""
    C = big_C(alphas, mode=mode)
    terms = tuple((c * a, a, 0) for c, a in zip(C.values, C.exponents))
    return ClosedFormLaw(terms, BetaMultiset.from_values(C.exponents))


def block_law(betas: Sequence, alpha, m: int) -> ClosedFormLaw:
    """Distinct ``betas`` plus ``alpha`` repeated ``m`` times, via the d-coefficients.

    ``f = sum_j d_j^(m) f_{beta_j} - alpha^-1 sum_{k<m} (sum_j beta_j d_j^(m-k)) f_{alpha x (k+1)}``
    """
    if m < 1:
        raise InvalidInputError(f"multiplicity {m} must be positive")
    d = {l: d_coeff(betas, alpha, l) for l in range(1, m + 1)}
    vals = d[m].exponents
    alpha = _same_kind(alpha, vals)
    out = ClosedFormLaw(())
    for dj, bj in zip(d[m].values, vals):
        out = out + dj * repeated_law(bj, 1)
    for k in range(m):
        weight = sum(bj * dj for bj, dj in zip(vals, d[m - k].values))
        out = out - (weight / alpha) * repeated_law(alpha, k + 1)
    return out.tagged(BetaMultiset(tuple((b, 1) for b in vals) + ((alpha, m),)))


def two_block_law(alpha, k: int, gamma, l: int) -> ClosedFormLaw:
    """``alpha`` repeated ``k`` times with ``gamma`` repeated ``l`` times (pochhammer/e form)."""
    if k < 1 or l < 1:
        raise InvalidInputError("block multiplicities must be positive")
    alpha, gamma = _pair(alpha, gamma)
    if not (alpha > 0 and gamma > 0) or alpha == gamma:
        raise InvalidInputError("alpha and gamma must be distinct positive numbers")
    front = (alpha / (alpha - gamma)) ** k * (gamma / (gamma - alpha)) ** l
    out = ClosedFormLaw(())
    for s in range(1, k + 1):
        w = _ratio(pochhammer(l, k - s), math.factorial(k - s), alpha) * ((alpha - gamma) / alpha) ** s
        out = out + (front * w) * repeated_law(alpha, s)
    for r, e in enumerate(e_coeff(k, l), start=1):
        out = out - (front * e * ((gamma - alpha) / gamma) ** r) * repeated_law(gamma, r)
    return out.tagged(BetaMultiset(((alpha, k), (gamma, l))))


def distinct_two_block_law(betas: Sequence, alpha, m: int, gamma, l: int) -> ClosedFormLaw:
    """Distinct ``betas`` with blocks ``alpha x m`` and ``gamma x l``.

    ``sum_j d_j^(m) f_{beta_j, gamma x l}
    - alpha^-1 sum_{k<m} (sum_j beta_j d_j^(m-k)) f_{alpha x (k+1), gamma x l}``
    where the first family comes from :func:`block_law` and the second from
    :func:`two_block_law`.
    """
    d = {q: d_coeff(betas, alpha, q) for q in range(1, m + 1)}
    vals = d[m].exponents
    alpha = _same_kind(alpha, vals)
    gamma = _same_kind(gamma, vals)
    if gamma in vals or gamma == alpha:
        raise InvalidInputError("gamma must differ from alpha and every beta")
    out = ClosedFormLaw(())
    for dj, bj in zip(d[m].values, vals):
        out = out + dj * block_law([bj], gamma, l)
    for k in range(m):
        weight = sum(bj * dj for bj, dj in zip(vals, d[m - k].values))
        out = out - (weight / alpha) * two_block_law(alpha, k + 1, gamma, l)
    source = BetaMultiset(tuple((b, 1) for b in vals) + ((alpha, m), (gamma, l)))
    return out.tagged(source)


CASES = ("distinct+block", "two-blocks", "distinct+two-blocks")


def case_formula_law(case: str, **params) -> ClosedFormLaw:
    """Dispatch to the explicit case formula named by ``case``.

    ``"distinct+block"``: ``betas, alpha, m``;
    ``"two-blocks"``: ``alpha, k, gamma, l``;
    ``"distinct+two-blocks"``: ``betas, alpha, m, gamma, l``.
    """
    builders = {
        "distinct+block": block_law,
        "two-blocks": two_block_law,
        "distinct+two-blocks": distinct_two_block_law,
    }
    if case not in builders:
        raise InvalidInputError(f"unknown case {case!r}; expected one of {CASES}")
    return builders[case](**params)


def product_expansion(a, p: int, b, q: int) -> ClosedFormLaw:
    """``f_{a x p} * F_{b x q}`` rewritten in the term family (requires ``a + b != 0``).

    ``(a/(a+b))**p sum_{j<q} (p)_j / j! (b/(a+b))**j f_{(a+b) x (p+j)}``
    """
    if a + b == 0:
        raise InvalidInputError("a + b must be nonzero")
    out = ClosedFormLaw(())
    base = (a / (a + b)) ** p
    for j in range(q):
        w = base * _ratio(pochhammer(p, j), math.factorial(j), a) * (b / (a + b)) ** j
        out = out + w * ClosedFormLaw(repeated_law(a + b, p + j).terms)
    return out


def block_cdf_second_form(betas: Sequence, alpha, m: int, t, literal: bool = True):
    """Second displayed CDF expression for distinct ``betas`` plus ``alpha x m``.

    ``literal=True`` evaluates the expression as printed, with the product
    ``F_{(alpha-beta_j) x m} * F_{alpha}``.  ``literal=False`` uses
    ``F_{(alpha-beta_j) x m} * F_{beta_j}``, which is what the term-by-term
    rearrangement of the first expression produces.  This is a diagnostic;
    callers compare it with :func:`build_law` and report the gap.
    """
    d = d_coeff(betas, alpha, m)
    t = np.asarray(t, dtype=float)
    out = repeated_cdf(alpha, m, t)
    for dj, bj in zip(d.as_floats(), d.exponents):
        out = out + dj * repeated_cdf(bj, 1, t)
        partner = repeated_cdf(alpha, 1, t) if literal else repeated_cdf(bj, 1, t)
        out = out - dj * repeated_cdf(float(alpha) - float(bj), m, t) * partner
    return out


def _same_kind(value, reference):
    if reference and isinstance(reference[0], Fraction):
        return Fraction(value)
    return float(value)


def _pair(a, b):
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a), Fraction(b)
    return float(a), float(b)


def _ratio(num: int, den: int, like):
    if isinstance(like, (int, Fraction)):
        return Fraction(num, den)
    return num / den


# -- independent oracles -----------------------------------------------------

def repeated_cdf_gamma(m: int, alpha: float, t):
    """``P[exp(-G) <= t]`` for ``G ~ Gamma(shape=m, rate=alpha)``.

    Equals the regularized upper incomplete gamma function ``Q(m, -alpha log t)``.
    """
    t = np.asarray(t, dtype=float)
    if m < 1 or not alpha > 0:
        raise InvalidInputError("need m >= 1 and alpha > 0")
    if np.any(~(t > 0)) or np.any(t > 1):
        raise DomainError("t must lie in (0, 1]")
    out = special.gammaincc(m, -alpha * np.log(t))
    return out if out.ndim else float(out)


ORACLE_MAX_SIZE = 4


def pdf_numeric_oracle(multiset, x: float) -> float:
    """Density by nested adaptive quadrature of the product convolution.

    ``f_{A + {b}}(z) = b z**(b-1) int_z^1 f_A(t) t**(-b) dt`` applied
    recursively; only for small multisets because the cost is exponential.
    """
    multiset = _as_multiset(multiset)
    if multiset.size > ORACLE_MAX_SIZE:
        raise UnsupportedError(f"numeric oracle supports at most {ORACLE_MAX_SIZE} factors")
    if not 0 < x <= 1:
        raise DomainError("x must lie in (0, 1]")
    values = [float(v) for v in multiset.expanded()]

    def density(vals, z):
        b = vals[-1]
        head = b * z ** (b - 1.0)
        if len(vals) == 1:
            return head
        if z == 1.0:
            return 0.0
        inner, _ = integrate.quad(lambda t: density(vals[:-1], t) * t ** (-b), z, 1.0,
                                  epsabs=1e-14, epsrel=1e-13, limit=200)
        return head * inner

    return float(density(values, float(x)))


# -- sampling ----------------------------------------------------------------

@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    seed: int
    stream: int


def sample(multiset, n: int, seed: int, stream: int = 0) -> SampleBatch:
    """Draw ``n`` realizations of ``exp(-sum_i E_i / b_i)`` with unit exponentials ``E_i``.

    Underflow to 0 is clamped to the smallest positive double so every value
    stays in ``(0, 1]``.
    """
    multiset = _as_multiset(multiset)
    if n < 1:
        raise InvalidInputError(f"sample size {n} must be positive")
    rng = streams.generator(seed, stream, streams.SAMPLER)
    rates = np.array([1.0 / float(v) for v in multiset.expanded()])
    expo = rng.standard_exponential((n, rates.size))
    values = np.exp(-(expo @ rates))
    np.maximum(values, TINY, out=values)
    return SampleBatch(values, int(seed), int(stream))


def sup_distance(values, law: ClosedFormLaw) -> float:
    """Kolmogorov distance between the empirical CDF of ``values`` and ``law``."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    F = law.cdf(x)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def dkw_epsilon(n: int, confidence: float = 0.99) -> float:
    """Half-width of the DKW band holding with probability ``confidence``."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))
