"""Log-characteristic functions and simulation of ``int_(0,1] h(t) dY(r(t))``.

The integrand family is ``h(t) = t**p`` and the time change ``r`` is the CDF
of a genuine :class:`~randintegral.product_law.ClosedFormLaw`.  With ``T``
distributed as ``r`` the log characteristic function is ``E[Phi(h(T) y)]``,
which :func:`logcf_quadrature` evaluates term by term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import streams
from .coefficients import BetaMultiset, is_rational
from .errors import DimensionError, InvalidInputError, NumericError, UnsupportedError
from .levy_core import FiniteAtomic, LevyTriple, _points, levy_exponent
from .product_law import ClosedFormLaw, build_law
from .quadrature import DEFAULT_TOL, RayCarrier, expect_over_law

BLOCK_PATHS = 1024
MIN_GRID = 64


@dataclass(frozen=True)
class IntegralSpec:
    """Random integral ``int_(0,1] t**power dY(r(t))`` with ``r`` the CDF of ``timechange``."""

    timechange: ClosedFormLaw
    power: float = 1

    def __post_init__(self):
        if not self.timechange.genuine:
            raise InvalidInputError("the time change must be a genuine product law")
        if not self.power > 0:
            raise UnsupportedError("only integrands t**p with p > 0 are supported")

    @classmethod
    def canonical(cls, multiset: BetaMultiset) -> "IntegralSpec":
        """``int t dY(r_A(t))``."""
        return cls(build_law(multiset), 1)

    @classmethod
    def single(cls, beta) -> "IntegralSpec":
        """``int t**(1/beta) dY(t)``, the other form of ``J^beta``."""
        power = 1 / Fraction(beta) if is_rational(beta) else 1.0 / float(beta)
        return cls(build_law(BetaMultiset.of(1)), power)

    def h(self, t):
        return np.asarray(t, dtype=float) ** float(self.power)

    def integrand_law(self) -> BetaMultiset:
        """Multiset whose product law is the law of ``h(T)``."""
        return self.timechange.source.scaled(self.power)


Exponent = Callable[[np.ndarray], np.ndarray]


def _exponent_fn(exponent) -> tuple[Exponent, int | None]:
    if isinstance(exponent, LevyTriple):
        return (lambda y: levy_exponent(exponent, y)), exponent.dim
    return exponent, None


def _grid(y, dim: int | None) -> tuple[np.ndarray, tuple]:
    if dim is None:
        y = np.asarray(y, dtype=float)
        dim = 1 if y.ndim <= 1 else y.shape[-1]
    return _points(y, dim)


def logcf_quadrature(exponent, spec: IntegralSpec, y, tol: float = DEFAULT_TOL):
    """``integral_0^1 Phi(h(s) y) dr(s)`` for every point of ``y``.

    ``exponent`` is a :class:`LevyTriple` or a vectorized callable taking an
    ``(n, d)`` array of arguments.
    """
    phi, dim = _exponent_fn(exponent)
    Y, shape = _grid(y, dim)
    p = float(spec.power)

    def integrand(s):
        args = (s ** p)[:, None, None] * Y[None, :, :]
        return np.asarray(phi(args.reshape(-1, Y.shape[1]))).reshape(s.size, Y.shape[0])

    out = expect_over_law(integrand, spec.timechange, tol=tol).reshape(shape)
    return out if out.ndim else complex(out)


def _layer(inner, Y: np.ndarray, spec: IntegralSpec, tol: float):
    """Return ``u -> E[inner(h(T) u)]`` on rays ``u * Y``, as a function of ``u`` arrays."""
    p = float(spec.power)

    def outer(u):
        u = np.asarray(u, dtype=float)

        def integrand(s):
            args = np.outer(s ** p, u).ravel()
            return inner(args).reshape(s.size, u.size, Y.shape[0])

        return expect_over_law(integrand, spec.timechange, tol=tol)

    return outer


def nested_logcf(exponent, specs: Sequence[IntegralSpec], y, tol: float = DEFAULT_TOL):
    """Log-cf of ``I^{spec_m}( ... I^{spec_1}(nu))`` one mapping at a time.

    Every inner layer is represented along the rays ``u * y`` by a Chebyshev
    carrier and integrated against the next time change; only the outermost
    layer is evaluated directly at ``u = 1``.
    """
    if not specs:
        raise InvalidInputError("at least one mapping is required")
    phi, dim = _exponent_fn(exponent)
    Y, shape = _grid(y, dim)

    def base(u):
        args = np.asarray(u, dtype=float)[:, None, None] * Y[None, :, :]
        return np.asarray(phi(args.reshape(-1, Y.shape[1]))).reshape(np.size(u), Y.shape[0])

    current = base
    for spec in specs[:-1]:
        current = RayCarrier.fit(_layer(current, Y, spec, tol))
    out = _layer(current, Y, specs[-1], tol)(np.array([1.0]))[0]
    out = out.reshape(shape)
    return out if out.ndim else complex(out)


def compose_residual(triple: LevyTriple, betas: Sequence, y, tol: float = DEFAULT_TOL) -> float:
    """Max gap between sequential ``J^{beta_m} o ... o J^{beta_1}`` and one ``r_A`` integral.

    ``betas`` is ordered: ``betas[0]`` is applied first.
    """
    betas = list(betas)
    layers = [IntegralSpec.canonical(BetaMultiset.of(b)) for b in betas]
    sequential = np.asarray(nested_logcf(triple, layers, y, tol=tol))
    direct = np.asarray(logcf_quadrature(triple, IntegralSpec.canonical(BetaMultiset.from_values(betas)), y,
                                         tol=tol))
    return float(np.abs(sequential - direct).max())


def general_compose_residual(spec1: IntegralSpec, spec2: IntegralSpec, exponent, y,
                             tol: float = DEFAULT_TOL) -> float:
    """Gap between ``log I^{spec1}(I^{spec2}(nu))`` and the single integral with ``r_3``.

    The left side is the double integral ``E[Phi(h1(X1) h2(X2) y)]``; the right
    side integrates ``Phi(s y)`` against the law of ``h1(X1) h2(X2)``, which
    for power integrands is again a product-of-uniform-powers law.
    """
    composed = np.asarray(nested_logcf(exponent, [spec2, spec1], y, tol=tol))
    law3 = build_law(spec1.integrand_law().union(spec2.integrand_law()))
    single = np.asarray(logcf_quadrature(exponent, IntegralSpec(law3, 1), y, tol=tol))
    return float(np.abs(composed - single).max())


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Simulated integrals, one row per path.

    ``truncated_mass`` is ``r(1/grid)``, the time-change mass of ``(0, t_1]``
    left out of the Riemann-Stieltjes sum.
    """

    samples: np.ndarray
    seed: int
    grid_size: int
    truncated_mass: float
    first_path: int = 0

    def mean(self) -> np.ndarray:
        return np.array([math.fsum(col) / col.size for col in self.samples.T])

    def mean_standard_error(self) -> np.ndarray:
        return self.samples.std(axis=0, ddof=1) / math.sqrt(self.samples.shape[0])


def _psd_root(R: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(R)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def simulate_integral(triple: LevyTriple, spec: IntegralSpec, n_paths: int, grid_size: int, seed: int,
                      first_path: int = 0) -> SimulationResult:
    """Draw ``n_paths`` realizations of ``sum_i h(tau_i) (Y(r(t_i)) - Y(r(t_{i-1})))``.

    The grid is ``t_i = i / grid_size`` for ``i = 1 .. grid_size`` and each
    increment is tagged at the interval midpoint ``tau_i``.  Over a clock
    increment ``dr`` the Levy increment is a drift ``dr (a - sum_{|x|<=1} m x)``,
    a Gaussian with covariance ``dr R`` and a Poisson(``dr m``) count of each
    atom.  Paths are generated in blocks of ``BLOCK_PATHS`` keyed by
    ``(seed, block index)``, so path ``k`` is the same regardless of how many
    paths are requested around it.
    """
    return _simulate(triple, spec, n_paths, grid_size, seed, first_path, (1,))[0]


def simulate_coupled(triple: LevyTriple, spec: IntegralSpec, n_paths: int, grid_size: int, seed: int,
                     factor: int = 2) -> tuple[SimulationResult, SimulationResult]:
    """Simulate on ``grid_size`` and on the ``factor``-times coarser grid from the same increments.

    Each coarse increment is the sum of ``factor`` fine ones, so both results
    are exact in law for their grids and their difference isolates the
    discretization effect.  The fine result equals :func:`simulate_integral`.
    """
    if factor < 1 or grid_size % factor:
        raise InvalidInputError(f"factor {factor} must divide the grid size {grid_size}")
    if grid_size // factor < MIN_GRID:
        raise InvalidInputError(f"coarse grid {grid_size // factor} is below the minimum {MIN_GRID}")
    fine, coarse = _simulate(triple, spec, n_paths, grid_size, seed, 0, (1, factor))
    return fine, coarse


def _simulate(triple, spec, n_paths, grid_size, seed, first_path, factors):
    M = triple.measure
    if not isinstance(M, FiniteAtomic):
        raise UnsupportedError("simulation needs a finite atomic Levy measure")
    if grid_size < MIN_GRID:
        raise InvalidInputError(f"grid size {grid_size} is below the minimum {MIN_GRID}")
    if n_paths < 1 or first_path < 0:
        raise InvalidInputError("need n_paths >= 1 and first_path >= 0")
    seed = streams.check_seed(seed)
    d = triple.dim
    t = np.arange(1, grid_size + 1) / grid_size
    r = spec.timechange.cdf(t)
    dr = np.diff(r)
    # fine interval j runs from t_{j+1} to t_{j+2}; on a grid coarsened by c it
    # belongs to the cell starting at t_{kc} with k = (j+1)//c, dropped when k = 0
    j = np.arange(dr.size)
    tag_sets = []
    for c in factors:
        k = (j + 1) // c
        tags = spec.h((k + 0.5) * c / grid_size)
        tag_sets.append(np.where(k > 0, tags, 0.0))
    tags = np.stack(tag_sets)
    inside = M.norms <= 1.0 if M.masses.size else np.zeros(0, dtype=bool)
    drift = triple.shift - (M.masses[inside] @ M.points[inside] if np.any(inside) else 0.0)
    drift_total = np.outer(tags @ dr, drift)
    gauss_scale = tags * np.sqrt(dr)
    root = _psd_root(triple.covariance)
    has_gauss = bool(np.any(root))

    stop = first_path + n_paths
    out = np.empty((len(factors), n_paths, d))
    for block in range(first_path // BLOCK_PATHS, (stop - 1) // BLOCK_PATHS + 1):
        rng = streams.generator(seed, block, streams.PATHS)
        lo = block * BLOCK_PATHS
        values = np.repeat(drift_total[:, None, :], BLOCK_PATHS, axis=1)
        if has_gauss:
            z = rng.standard_normal((BLOCK_PATHS, dr.size, d))
            values += np.einsum("li,bid->lbd", gauss_scale, z) @ root.T
        for point, mass in zip(M.points, M.masses):
            counts = rng.poisson(dr * mass, size=(BLOCK_PATHS, dr.size))
            values += (counts @ tags.T).T[:, :, None] * point
        a, b = max(lo, first_path), min(lo + BLOCK_PATHS, stop)
        out[:, a - first_path:b - first_path] = values[:, a - lo:b - lo]
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite increment in path simulation")
    return [SimulationResult(out[i], seed, grid_size // c, float(r[c - 1]), first_path)
            for i, c in enumerate(factors)]


@dataclass(frozen=True, eq=False)
class EmpiricalCF:
    """Empirical characteristic function on a grid with conservative standard errors."""

    y_grid: np.ndarray
    estimates: np.ndarray
    standard_errors: np.ndarray
    n_paths: int
    seed: int | None = None


def empirical_cf(samples, y, seed: int | None = None) -> EmpiricalCF:
    """Mean of ``exp(i <y, X>)`` at each grid point; standard error ``1/sqrt(n)``."""
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    if n < 100:
        raise InvalidInputError(f"need at least 100 samples, got {n}")
    Y, shape = _points(y, d)
    est = np.empty(Y.shape[0], dtype=complex)
    for k, yk in enumerate(Y):
        phase = X @ yk
        est[k] = complex(math.fsum(np.cos(phase)), math.fsum(np.sin(phase))) / n
    se = np.full(Y.shape[0], 1.0 / math.sqrt(n))
    return EmpiricalCF(Y, est, se, n, seed)


@dataclass(frozen=True, eq=False)
class CFComparison:
    y_grid: np.ndarray
    estimates: np.ndarray
    standard_errors: np.ndarray
    analytic: np.ndarray
    deviations: np.ndarray
    z: float
    flags: np.ndarray = field(repr=False)

    @property
    def max_deviation(self) -> float:
        return float(self.deviations.max())

    @property
    def passed(self) -> bool:
        return bool(not self.flags.any())


def cf_compare(emp: EmpiricalCF, analytic_logcf, z: float = 4.0) -> CFComparison:
    """Standardized gaps ``|emp - exp(logcf)| / se`` and a pass flag at threshold ``z``.

    ``analytic_logcf`` is either an array aligned with ``emp.y_grid`` or a
    callable evaluated on it.
    """
    values = analytic_logcf(emp.y_grid) if callable(analytic_logcf) else analytic_logcf
    values = np.asarray(values, dtype=complex).reshape(-1)
    if values.size != emp.estimates.size:
        raise DimensionError("analytic values do not match the empirical grid")
    target = np.exp(values)
    dev = np.abs(emp.estimates - target) / emp.standard_errors
    return CFComparison(emp.y_grid, emp.estimates, emp.standard_errors, target, dev, z, dev > z)
