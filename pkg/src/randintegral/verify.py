"""Named verification suites shared by the CLI and the test-suite.

Every check returns a :class:`CheckResult` with the worst residual seen and
the tolerance it was held to.  Random configurations are drawn from a
generator seeded by the caller, so a suite run is reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import streams
from .coefficients import (BetaMultiset, big_C, lagrange_identity_residual, lagrange_terms, little_c, rho,
                           two_block_bracket)
from .integral_engine import compose_residual
from .levy_core import (BallComplement, decompose, levy_exponent, logcf_signed_sum, measure_eval,
                        standard_test_triple, transform_multi, transform_single)
from .product_law import (block_cdf_second_form, block_law, build_law, distinct_law, distinct_two_block_law,
                          dkw_epsilon, repeated_cdf_gamma, repeated_law, sample, sup_distance, two_block_law)

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""
    informational: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def _rng(seed: int) -> np.random.Generator:
    return streams.generator(seed, 0, domain=streams.VERIFY)


def random_rationals(rng, n: int, lo=Fraction(1, 2), hi=Fraction(10), den: int = 16) -> list:
    """``n`` distinct rationals ``k/den`` in ``[lo, hi]``."""
    grid = np.arange(math.ceil(lo * den), math.floor(hi * den) + 1)
    picks = rng.choice(grid, size=n, replace=False)
    return [Fraction(int(k), den) for k in picks]


# -- coefficient identities --------------------------------------------------

def check_partition_of_unity(seed: int, cases: int = 200, max_n: int = 10) -> CheckResult:
    rng = _rng(seed)
    worst = 0.0
    for _ in range(cases):
        betas = random_rationals(rng, int(rng.integers(1, max_n + 1)))
        exact = big_C(betas, mode="exact")
        if exact.total() != 1:
            return CheckResult("partition_of_unity", False, math.inf, 0.0, f"exact sum {exact.total()} for {betas}")
        floats = big_C([float(b) for b in betas], mode="float")
        scale = max(abs(c) for c in floats.values)
        worst = max(worst, abs(floats.total() - 1.0) / scale)
    return CheckResult("partition_of_unity", worst <= 1e-8, worst, 1e-8,
                       f"{cases} exponent sets; exact sums all equal 1; float residual relative to max|C|")


def random_separated_points(rng, n: int, gap: float = 0.1, radius: float = 3.0) -> list[complex]:
    pts: list[complex] = []
    while len(pts) < n:
        z = complex(*rng.uniform(-radius, radius, 2))
        if all(abs(z - w) >= gap for w in pts):
            pts.append(z)
    return pts


def check_lagrange(seed: int, cases: int = 500, max_n: int = 8) -> CheckResult:
    rng = _rng(seed)
    worst = 0.0
    for _ in range(cases):
        zs = random_separated_points(rng, int(rng.integers(1, max_n + 1)))
        z = complex(*rng.uniform(-3.0, 3.0, 2))
        scale = max(1.0, max(abs(t) for t in lagrange_terms(zs, z)))
        worst = max(worst, lagrange_identity_residual(zs, z) / scale)
    return CheckResult("lagrange_identity", worst <= 1e-10, worst, 1e-10,
                       f"{cases} complex configurations, gap >= 0.1; residual relative to the largest term")


def check_two_block_bracket(seed: int, pairs: int = 10, max_kl: int = 8) -> CheckResult:
    rng = _rng(seed)
    failures = 0
    for _ in range(pairs):
        alpha, gamma = random_rationals(rng, 2)
        for k in range(1, max_kl + 1):
            for l in range(1, max_kl + 1):
                if two_block_bracket(k, l, alpha, gamma, mode="exact") != 1:
                    failures += 1
    return CheckResult("two_block_identity", failures == 0, float(failures), 0.0,
                       f"{pairs} rational (alpha, gamma) pairs, 1 <= k, l <= {max_kl}; count of inexact brackets")


def check_rho(seed: int, cases: int = 50) -> CheckResult:
    rng = _rng(seed)
    for _ in range(cases):
        betas = random_rationals(rng, int(rng.integers(1, 8)))
        r = rho(BetaMultiset.from_values(betas))
        C = big_C(betas, mode="exact")
        if [r[b] for b in C.exponents] != list(C.values) or sum(r.values()) != 1:
            return CheckResult("rho_matches_C", False, math.inf, 0.0, f"mismatch for {betas}")
    return CheckResult("rho_matches_C", True, 0.0, 0.0, f"{cases} distinct multisets, exact")


def check_recursions(seed: int, cases: int = 50) -> CheckResult:
    rng = _rng(seed)
    for _ in range(cases):
        vals = random_rationals(rng, int(rng.integers(2, 9)))
        head, new = vals[:-1], vals[-1]
        c_n = little_c(head, mode="exact")
        c_next = little_c(vals, mode="exact")
        by_value = dict(zip(c_next.exponents, c_next.values))
        if any(c / (new - a) != by_value[a] for c, a in zip(c_n.values, c_n.exponents)):
            return CheckResult("little_c_recursions", False, math.inf, 0.0, f"step recursion fails for {vals}")
        closing = sum(c / (a - new) for c, a in zip(c_n.values, c_n.exponents))
        if closing != by_value[new]:
            return CheckResult("little_c_recursions", False, math.inf, 0.0, f"closing recursion fails for {vals}")
    return CheckResult("little_c_recursions", True, 0.0, 0.0, f"{cases} exponent lists, exact")


# -- laws ---------------------------------------------------------------------

def case_configurations(seed: int, count: int = 60) -> list:
    """Pairs ``(label, explicit formula law, multiset)`` with rational exponents in [0.5, 10]."""
    rng = _rng(seed)
    configs = []
    kinds = ("repeated", "distinct", "distinct+block", "two-blocks", "distinct+two-blocks")
    for i in range(count):
        kind = kinds[i % len(kinds)]
        if kind == "repeated":
            (a,) = random_rationals(rng, 1)
            m = int(rng.integers(1, 7))
            law, pairs = repeated_law(a, m), [(a, m)]
        elif kind == "distinct":
            vals = random_rationals(rng, int(rng.integers(1, 7)))
            law, pairs = distinct_law(vals, mode="exact"), [(v, 1) for v in vals]
        elif kind == "distinct+block":
            vals = random_rationals(rng, int(rng.integers(2, 6)))
            m = int(rng.integers(1, 5))
            law, pairs = block_law(vals[1:], vals[0], m), [(v, 1) for v in vals[1:]] + [(vals[0], m)]
        elif kind == "two-blocks":
            a, g = random_rationals(rng, 2)
            k, l = (int(v) for v in rng.integers(1, 5, 2))
            law, pairs = two_block_law(a, k, g, l), [(a, k), (g, l)]
        else:
            vals = random_rationals(rng, int(rng.integers(3, 6)))
            m, l = (int(v) for v in rng.integers(1, 4, 2))
            law = distinct_two_block_law(vals[2:], vals[0], m, vals[1], l)
            pairs = [(v, 1) for v in vals[2:]] + [(vals[0], m), (vals[1], l)]
        configs.append((kind, law, BetaMultiset.from_pairs(pairs)))
    return configs


def check_case_formulas(seed: int, count: int = 60, points: int = 100) -> CheckResult:
    x = np.linspace(0.01, 1.0, points)
    worst = 0.0
    identical = 0
    for _, law, multiset in case_configurations(seed, count):
        built = build_law(multiset)
        identical += built.terms == law.terms
        worst = max(worst, float(np.abs(built.pdf(x) - law.pdf(x)).max()),
                    float(np.abs(built.cdf(x) - law.cdf(x)).max()))
    return CheckResult("case_formulas", worst <= 1e-10, worst, 1e-10,
                       f"{count} configurations, {points} points; {identical} with identical exact term sets")


def check_gamma(seed: int = 0, points: int = 50) -> CheckResult:
    t = np.linspace(0.02, 1.0, points)
    worst = 0.0
    for alpha in (Fraction(1, 2), 1, 3):
        for m in range(1, 11):
            law = build_law(BetaMultiset(((alpha, m),)))
            worst = max(worst, float(np.abs(law.cdf(t) - repeated_cdf_gamma(m, float(alpha), t)).max()))
    return CheckResult("gamma_oracle", worst <= 1e-12, worst, 1e-12,
                       f"m <= 10, alpha in (1/2, 1, 3), {points} points")


def check_normalization(seed: int, cases: int = 40) -> CheckResult:
    rng = _rng(seed)
    for _ in range(cases):
        vals = random_rationals(rng, int(rng.integers(1, 5)))
        mults = [int(v) for v in rng.integers(1, 3, len(vals))]
        law = build_law(BetaMultiset.from_pairs(zip(vals, mults)))
        if law.total_mass() != 1:
            return CheckResult("normalization", False, math.inf, 0.0, f"mass {law.total_mass()} for {vals}")
    return CheckResult("normalization", True, 0.0, 0.0, f"{cases} rational multisets, total mass exactly 1")


def check_second_form(seed: int) -> CheckResult:
    """Compare both readings of the alternative CDF expression; never fails the suite."""
    t = np.linspace(0.05, 1.0, 40)
    gaps = {}
    for literal in (True, False):
        worst = 0.0
        for betas, alpha, m in (([1], 2, 1), ([1, 3], 2, 2), ([Fraction(1, 2)], 4, 3)):
            law = build_law(BetaMultiset.from_pairs([(b, 1) for b in betas] + [(alpha, m)]))
            worst = max(worst, float(np.abs(block_cdf_second_form(betas, alpha, m, t, literal) - law.cdf(t)).max()))
        gaps["as printed" if literal else "partner F_beta"] = worst
    detail = "; ".join(f"{k}: max gap {v:.3g}" for k, v in gaps.items())
    return CheckResult("alternative_cdf_expression", True, gaps["partner F_beta"], 1e-10, detail, informational=True)


def check_sampler(seed: int, n: int = 10**6, bound: float = 0.002) -> CheckResult:
    worst = 0.0
    parts = []
    for idx, multiset in enumerate(MC_MULTISETS):
        batch = sample(multiset, n, seed, stream=idx)
        dist = sup_distance(batch.values, build_law(multiset))
        parts.append(f"{multiset}: {dist:.2e}")
        worst = max(worst, dist)
    return CheckResult("sampler_dkw", worst <= bound, worst, bound,
                       f"n={n}, DKW 99% half-width {dkw_epsilon(n):.2e}; " + ", ".join(parts))


MC_MULTISETS = tuple(BetaMultiset.parse(s) for s in (
    "1", "1,2", "2x2", "0.5,3", "1x3", "1,2,3,4", "0.5x2,2", "3x2,1x2", "1,2x2,5", "0.5,1,2,3.5,6,8",
))


# -- triples ------------------------------------------------------------------

DECOMPOSITION_RADII = tuple(np.geomspace(0.05, 4.0, 20))


def distinct_multisets(seed: int, count: int, max_n: int = 4) -> list[list]:
    rng = _rng(seed)
    return [random_rationals(rng, int(rng.integers(1, max_n + 1)), den=4) for _ in range(count)]


def check_decomposition(seed: int, count: int = 20) -> CheckResult:
    nu = standard_test_triple()
    worst = 0.0
    for betas in distinct_multisets(seed, count):
        direct = transform_multi(nu, BetaMultiset.from_values(betas))
        split = decompose(nu, betas)
        worst = max(worst, float(np.abs(direct.shift - split.shift).max()),
                    float(np.abs(direct.covariance - split.covariance).max()))
        for rad in DECOMPOSITION_RADII:
            region = BallComplement(float(rad))
            worst = max(worst, abs(measure_eval(direct.measure, region) - split.measure_eval(region)))
    masses = len(DECOMPOSITION_RADII)
    return CheckResult("triple_decomposition", worst <= 1e-10, worst, 1e-10,
                       f"{count} distinct multisets of size <= 4; shift, covariance and {masses} masses")


Y_GRID = np.linspace(-3.0, 3.0, 21)


def check_signed_sum_logcf(seed: int, count: int = 10) -> CheckResult:
    nu = standard_test_triple()
    worst = 0.0
    for betas in distinct_multisets(seed + 1, count):
        direct = levy_exponent(transform_multi(nu, BetaMultiset.from_values(betas)), Y_GRID)
        C = big_C(betas)
        singles = [transform_single(nu, b) for b in C.exponents]
        worst = max(worst, float(np.abs(logcf_signed_sum(singles, C.values, Y_GRID) - direct).max()))
    return CheckResult("exponent_decomposition", worst <= 1e-8, worst, 1e-8,
                       f"{count} distinct multisets, 21 points in [-3, 3]")


COMPOSE_VALUES = (Fraction(1, 2), 1, 2, Fraction(7, 2))


def check_compose(seed: int = 0, max_len: int = 4) -> CheckResult:
    nu = standard_test_triple()
    worst = 0.0
    worst_at = None
    count = 0
    for n in range(1, max_len + 1):
        for order in itertools.product(COMPOSE_VALUES, repeat=n):
            res = compose_residual(nu, list(order), Y_GRID)
            count += 1
            if res > worst:
                worst, worst_at = res, order
    label = ",".join(str(v) for v in worst_at) if worst_at else "-"
    return CheckResult("nested_vs_single_quadrature", worst <= 1e-8, worst, 1e-8,
                       f"{count} ordered lists; worst at [{label}]")


SUITES = {
    "identities": (check_partition_of_unity, check_lagrange, check_two_block_bracket, check_rho, check_recursions),
    "laws": (check_case_formulas, check_gamma, check_normalization, check_second_form),
    "mc": (check_sampler,),
    "decomposition": (check_decomposition, check_signed_sum_logcf),
    "compose": (check_compose,),
}
SUITE_NAMES = tuple(SUITES) + ("all",)


def run_suite(name: str, seed: int, **options) -> list[CheckResult]:
    """Run one suite, or all of them for ``name == "all"``.

    ``options`` holds per-check overrides; only ``samples`` (sampler size)
    is currently recognized.
    """
    names = tuple(SUITES) if name == "all" else (name,)
    results = []
    for suite in names:
        for check in SUITES[suite]:
            if check is check_sampler and "samples" in options:
                results.append(check(seed, n=options["samples"]))
            else:
                results.append(check(seed))
    return results
