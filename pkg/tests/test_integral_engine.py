import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from randintegral.coefficients import BetaMultiset
from randintegral.errors import InvalidInputError, UnsupportedError
from randintegral.integral_engine import (IntegralSpec, cf_compare, compose_residual, empirical_cf,
                                          general_compose_residual, logcf_quadrature, nested_logcf,
                                          simulate_coupled, simulate_integral)
from randintegral.levy_core import LevyTriple, levy_exponent, standard_test_triple, transform_multi
from randintegral.product_law import build_law

Y = np.linspace(-3, 3, 21)
GAUSS = LevyTriple.create([0], [[1]])


def canonical(text):
    return IntegralSpec.canonical(BetaMultiset.parse(text))


def zero_exponent(args):
    return np.zeros(args.shape[0], dtype=complex)


class TestSpec:
    def test_needs_genuine_law(self):
        with pytest.raises(InvalidInputError):
            IntegralSpec(build_law(BetaMultiset.of(1)) - build_law(BetaMultiset.of(2)))

    def test_power_family_only(self):
        with pytest.raises(UnsupportedError):
            IntegralSpec(build_law(BetaMultiset.of(1)), -1)

    def test_single_form_law(self):
        # h(U) = U**(1/beta) has CDF t**beta
        assert IntegralSpec.single(Fraction(3)).integrand_law() == BetaMultiset.of(3)
        assert IntegralSpec.single(2.5).integrand_law() == BetaMultiset.of(2.5)


class TestQuadrature:
    @pytest.mark.parametrize("beta", [0.5, 1, 2, 3.5])
    def test_gaussian_single(self, beta):
        got = logcf_quadrature(GAUSS, canonical(str(beta)), Y)
        assert np.abs(got - (-Y**2 / 2 * beta / (beta + 2))).max() <= 1e-10

    @pytest.mark.parametrize("text", ["1,2", "0.5x2,3", "1,2,3,4"])
    def test_gaussian_product(self, text):
        A = BetaMultiset.parse(text)
        factor = math.prod(float(b) / (float(b) + 2) for b in A.expanded())
        got = logcf_quadrature(GAUSS, IntegralSpec.canonical(A), Y)
        assert np.abs(got - (-Y**2 / 2 * factor)).max() <= 1e-10

    def test_gaussian_2d(self):
        R = np.array([[1.0, 0.3], [0.3, 2.0]])
        nu = LevyTriple.create([0, 0], R)
        pts = np.random.default_rng(0).normal(size=(7, 2))
        got = logcf_quadrature(nu, canonical("1,2"), pts)
        expected = -0.5 * np.einsum("ni,ij,nj->n", pts, R, pts) / 6
        assert np.abs(got - expected).max() <= 1e-10

    def test_zero_exponent(self):
        assert np.all(logcf_quadrature(zero_exponent, canonical("1,2x2"), Y) == 0)

    def test_shift_only(self):
        got = logcf_quadrature(LevyTriple.create([1], [[0]]), canonical("1,2"), Y)
        assert np.abs(got - 1j * Y / 3).max() <= 1e-10

    def test_zero_argument_and_symmetry(self):
        nu = standard_test_triple()
        spec = canonical("0.5,2x2")
        assert logcf_quadrature(nu, spec, 0.0) == 0
        pos = logcf_quadrature(nu, spec, Y)
        neg = logcf_quadrature(nu, spec, -Y)
        assert np.abs(neg - np.conj(pos)).max() <= 1e-12

    def test_other_integrand_form(self):
        # int t**(1/beta) dY(t) and int t dY(t**beta) have the same law
        nu = standard_test_triple()
        a = logcf_quadrature(nu, IntegralSpec.single(Fraction(2)), Y)
        b = logcf_quadrature(nu, canonical("2"), Y)
        assert np.abs(a - b).max() <= 1e-10


class TestComposition:
    def test_single_layer(self):
        assert compose_residual(standard_test_triple(), [2], Y) <= 1e-10

    def test_order(self):
        nu = standard_test_triple()
        assert compose_residual(nu, [1, 2], Y) <= 1e-8
        assert compose_residual(nu, [2, 1], Y) <= 1e-8
        a = nested_logcf(nu, [canonical("1"), canonical("2")], Y)
        b = nested_logcf(nu, [canonical("2"), canonical("1")], Y)
        assert np.abs(a - b).max() <= 1e-8

    def test_gaussian_both_routes(self):
        seq = nested_logcf(GAUSS, [canonical("1"), canonical("2")], Y)
        direct = logcf_quadrature(GAUSS, canonical("1,2"), Y)
        assert np.abs(seq + Y**2 / 12).max() <= 1e-10
        assert np.abs(direct + Y**2 / 12).max() <= 1e-10

    def test_repeated_and_fractional(self):
        assert compose_residual(standard_test_triple(), [Fraction(1, 2), 3, Fraction(1, 2), 2], Y) <= 1e-8

    def test_general_uniform_pair(self):
        spec = canonical("1")
        nu = standard_test_triple()
        assert general_compose_residual(spec, spec, nu, Y) <= 1e-8
        composed = nested_logcf(nu, [spec, spec], Y)
        assert np.abs(composed - logcf_quadrature(nu, canonical("1x2"), Y)).max() <= 1e-8

    def test_general_trivial_exponent(self):
        assert general_compose_residual(canonical("1"), canonical("1"), zero_exponent, Y) == 0

    def test_general_mixed_forms(self):
        # h1 = t**(1/2) with r1 = t, then h2 = t with r2 = t: the A = {2, 1} law
        s1, s2 = IntegralSpec.single(2), canonical("1")
        assert general_compose_residual(s1, s2, GAUSS, Y) <= 1e-8
        composed = nested_logcf(GAUSS, [s2, s1], Y)
        assert np.abs(composed - logcf_quadrature(GAUSS, canonical("1,2"), Y)).max() <= 1e-8

    def test_general_powers(self):
        s1 = IntegralSpec(build_law(BetaMultiset.of(3)), Fraction(1, 2))
        s2 = IntegralSpec(build_law(BetaMultiset.parse("1,2")), 2)
        assert general_compose_residual(s1, s2, standard_test_triple(), Y) <= 1e-8

    def test_matches_transformed_triple(self):
        nu = standard_test_triple()
        A = BetaMultiset.parse("1,0.5x2")
        direct = levy_exponent(transform_multi(nu, A), Y)
        nested = nested_logcf(nu, [canonical("0.5"), canonical("1"), canonical("0.5")], Y)
        assert np.abs(direct - nested).max() <= 1e-8


class TestSimulation:
    def test_gaussian_variance(self):
        sim = simulate_integral(GAUSS, canonical("2"), 100_000, 64, seed=11)
        var = sim.samples[:, 0].var(ddof=1)
        # the variance of a sample variance of normals is 2 sigma**4 / (n - 1)
        se = math.sqrt(2 * 0.5**2 / (sim.samples.shape[0] - 1))
        assert abs(var - 0.5) <= 3 * se

    def test_deterministic_drift(self):
        grid = 64
        sim = simulate_integral(LevyTriple.create([1], [[0]]), canonical("1"), 5, grid, seed=1)
        assert np.all(np.abs(sim.samples - 0.5) <= 1 / grid)
        assert np.all(sim.samples == sim.samples[0])

    def test_zero_triple(self):
        sim = simulate_integral(LevyTriple.zero(2), canonical("1,2"), 300, 64, seed=3)
        assert np.all(sim.samples == 0)

    def test_truncated_mass(self):
        sim = simulate_integral(GAUSS, canonical("1,2"), 10, 256, seed=3)
        assert sim.truncated_mass == pytest.approx(2 / 256 - 1 / 256**2)

    def test_prefix_independent(self):
        nu = standard_test_triple()
        whole = simulate_integral(nu, canonical("1,2"), 3000, 64, seed=5)
        part = simulate_integral(nu, canonical("1,2"), 100, 64, seed=5, first_path=2000)
        assert np.array_equal(part.samples, whole.samples[2000:2100])
        again = simulate_integral(nu, canonical("1,2"), 3000, 64, seed=5)
        assert np.array_equal(again.samples, whole.samples)

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            simulate_integral(GAUSS, canonical("1"), 10, 32, seed=1)
        with pytest.raises(UnsupportedError):
            simulate_integral(transform_multi(GAUSS, BetaMultiset.of(1)), canonical("1"), 10, 64, seed=1)

    @pytest.mark.slow
    def test_grid_doubling_stable(self):
        nu = standard_test_triple()
        fine, coarse = simulate_coupled(nu, canonical("1,2"), 100_000, 512, seed=17)
        assert coarse.grid_size == 256
        assert abs(coarse.mean()[0] - fine.mean()[0]) <= fine.mean_standard_error()[0]

    def test_coupled_fine_matches_plain(self):
        nu = standard_test_triple()
        fine, coarse = simulate_coupled(nu, canonical("1,2"), 2000, 128, seed=4)
        assert np.array_equal(fine.samples, simulate_integral(nu, canonical("1,2"), 2000, 128, seed=4).samples)
        assert coarse.truncated_mass == pytest.approx(build_law(BetaMultiset.of(1, 2)).cdf(2 / 128))

    def test_coupled_drift_uses_coarse_midpoints(self):
        # coarse cells (k/64, (k+1)/64], k >= 1, tagged at their midpoints
        fine, coarse = simulate_coupled(LevyTriple.create([1], [[0]]), canonical("1"), 3, 128, seed=2)
        k = np.arange(1, 64)
        assert coarse.samples[0, 0] == pytest.approx(np.sum((k + 0.5) / 64 / 64), abs=1e-14)

    def test_coupled_validation(self):
        with pytest.raises(InvalidInputError):
            simulate_coupled(GAUSS, canonical("1"), 10, 128, seed=1, factor=3)
        with pytest.raises(InvalidInputError):
            simulate_coupled(GAUSS, canonical("1"), 10, 64, seed=1, factor=2)

    def test_mean_matches_first_moment(self):
        # E X = E[T] (a + m x) for the atom outside the unit ball
        nu = standard_test_triple()
        sim = simulate_integral(nu, canonical("1,2"), 50_000, 128, seed=8)
        assert abs(sim.mean()[0] - (0.2 + 0.8 * 1.5) / 3) <= 4 * sim.mean_standard_error()[0]


class TestEmpiricalCF:
    def test_all_zero(self):
        emp = empirical_cf(np.zeros(400), Y)
        assert np.all(emp.estimates == 1)
        assert np.allclose(emp.standard_errors, 1 / 20)

    def test_uniform_samples(self):
        n = 10**6
        x = np.random.default_rng(4).random(n)
        emp = empirical_cf(x, [1.0])
        assert abs(emp.estimates[0] - (cmath.exp(1j) - 1) / 1j) <= 3 / math.sqrt(n)

    def test_conjugate_symmetry(self):
        x = np.random.default_rng(5).normal(size=1000)
        a = empirical_cf(x, Y).estimates
        b = empirical_cf(x, -Y).estimates
        assert np.array_equal(b, np.conj(a))

    def test_minimum_size(self):
        with pytest.raises(InvalidInputError):
            empirical_cf(np.zeros(99), Y)

    def test_compare_true_law(self):
        x = np.random.default_rng(6).normal(size=100_000)
        report = cf_compare(empirical_cf(x, Y), -Y**2 / 2)
        assert report.passed and report.max_deviation < 4

    def test_compare_wrong_variance(self):
        x = np.random.default_rng(6).normal(size=100_000)
        report = cf_compare(empirical_cf(x, [2.0]), [-2.0**2])
        assert not report.passed

    def test_compare_at_zero(self):
        report = cf_compare(empirical_cf(np.ones(100), [0.0]), [0.0])
        assert report.deviations[0] == 0 and report.analytic[0] == 1
