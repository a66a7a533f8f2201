"""Levy-Khintchine triples and their transforms under the mappings J^A.

Levy measures are finite sums of atoms (compound Poisson type), so every
shift, covariance and ball-complement mass of a transformed triple closes
exactly.  A transformed measure is kept lazily as its base atoms together
with the time-change law: each atom ``x`` is smeared along the segment
``{s x : 0 < s <= 1}`` with ``s`` distributed as the time change.

The truncation set in the exponent is the closed Euclidean unit ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coefficients import BetaMultiset, big_C
from .errors import DimensionError, InvalidInputError, UnsupportedError
from .product_law import ClosedFormLaw, build_law
from .quadrature import DEFAULT_TOL, expect_over_law

MAX_DIM = 3


@dataclass(frozen=True, eq=False)
class FiniteAtomic:
    """Atoms ``points[k]`` with masses ``masses[k]``, none at the origin."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        if points.ndim != 2 or points.shape[0] != masses.size:
            raise DimensionError("points must be a (k, d) array matching k masses")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(masses)):
            raise InvalidInputError("atoms must be finite")
        if np.any(masses <= 0):
            raise InvalidInputError("atom masses must be positive")
        if points.size and np.any(np.linalg.norm(points, axis=1) == 0):
            raise InvalidInputError("a Levy measure cannot charge the origin")
        points.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_atoms(cls, atoms: Sequence, dim: int) -> "FiniteAtomic":
        """Build from ``[(point, mass), ...]``; scalars are accepted when ``dim == 1``."""
        pts = np.zeros((len(atoms), dim))
        masses = np.zeros(len(atoms))
        for k, (point, mass) in enumerate(atoms):
            p = np.atleast_1d(np.asarray(point, dtype=float))
            if p.shape != (dim,):
                raise DimensionError(f"atom {k} has dimension {p.size}, expected {dim}")
            pts[k] = p
            masses[k] = mass
        return cls(pts, masses)

    @classmethod
    def empty(cls, dim: int) -> "FiniteAtomic":
        return cls(np.zeros((0, dim)), np.zeros(0))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)


@dataclass(frozen=True, eq=False)
class Transformed:
    """Image ``A -> integral_0^1 T_s(base)(A) dr(s)`` of a finite atomic measure."""

    base: FiniteAtomic
    timechange: ClosedFormLaw

    def __post_init__(self):
        if not isinstance(self.base, FiniteAtomic):
            raise UnsupportedError("only finite atomic base measures can be transformed")
        if not self.timechange.genuine:
            raise InvalidInputError("the time change must be a genuine product law")

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def total_mass(self) -> float:
        return self.base.total_mass


LevyMeasure = FiniteAtomic | Transformed


@dataclass(frozen=True)
class BallComplement:
    """The set ``{x : ||x|| > radius}``."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidInputError(f"ball radius {self.radius} must be positive")


@dataclass(frozen=True, eq=False)
class LevyTriple:
    """Shift ``a``, Gaussian covariance ``R`` and Levy measure ``M``."""

    shift: np.ndarray
    covariance: np.ndarray
    measure: FiniteAtomic | Transformed

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.shift, dtype=float))
        d = a.size
        R = np.asarray(self.covariance, dtype=float).reshape(d, d) if np.size(self.covariance) == d * d \
            else None
        if a.ndim != 1 or not 1 <= d <= MAX_DIM:
            raise DimensionError(f"dimension must be between 1 and {MAX_DIM}")
        if R is None:
            raise DimensionError(f"covariance must have {d * d} entries for dimension {d}")
        if not np.all(np.isfinite(a)) or not np.all(np.isfinite(R)):
            raise InvalidInputError("shift and covariance must be finite")
        if np.abs(R - R.T).max() > 1e-12:
            raise InvalidInputError("covariance is not symmetric")
        if np.linalg.eigvalsh(R).min() < -1e-10 * max(np.trace(R), 1e-300):
            raise InvalidInputError("covariance is not positive semidefinite")
        if self.measure.dim != d:
            raise DimensionError(f"Levy measure has dimension {self.measure.dim}, shift has {d}")
        a.setflags(write=False)
        R.setflags(write=False)
        object.__setattr__(self, "shift", a)
        object.__setattr__(self, "covariance", R)

    @classmethod
    def create(cls, shift, covariance, atoms: Sequence = ()) -> "LevyTriple":
        a = np.atleast_1d(np.asarray(shift, dtype=float))
        return cls(a, covariance, FiniteAtomic.from_atoms(list(atoms), a.size))

    @classmethod
    def zero(cls, dim: int = 1) -> "LevyTriple":
        return cls(np.zeros(dim), np.zeros((dim, dim)), FiniteAtomic.empty(dim))

    @property
    def dim(self) -> int:
        return self.shift.size


def standard_test_triple() -> LevyTriple:
    """``a = 0.2, R = 1`` and one atom of mass 0.8 at 1.5, in one dimension."""
    return LevyTriple.create([0.2], [[1.0]], [([1.5], 0.8)])


def levy_measure_valid(M: FiniteAtomic | Transformed) -> tuple[bool, float]:
    """Return ``(finite, integral of min(1, ||x||**2) dM)``.

    A finite atomic measure always passes; an atom at the origin is rejected
    when the measure is constructed.
    """
    if isinstance(M, FiniteAtomic):
        weights = np.minimum(1.0, M.norms ** 2)
    else:
        norms = M.base.norms
        law = M.timechange
        cut = np.minimum(1.0, 1.0 / norms)
        weights = norms ** 2 * law.partial_moment(2, cut) + (1.0 - law.cdf(cut))
        M = M.base
    value = math.fsum(weights * M.masses)
    return math.isfinite(value), value


def _points(y, d: int) -> tuple[np.ndarray, tuple]:
    y = np.asarray(y, dtype=float)
    if d == 1 and (y.ndim == 0 or y.shape[-1] != 1):
        y = y[..., None]
    if y.shape[-1] != d:
        raise DimensionError(f"argument has dimension {y.shape[-1]}, triple has {d}")
    return y.reshape(-1, d), y.shape[:-1]


def levy_exponent(triple: LevyTriple, y, tol: float = DEFAULT_TOL):
    """Levy exponent ``Phi(y) = log E exp(i <y, X>)`` of the triple.

    ``y`` has shape ``(..., d)``; in one dimension plain scalars and 1-D
    arrays of scalars are accepted.  The result has shape ``y.shape[:-1]``.
    """
    Y, shape = _points(y, triple.dim)
    quad_form = np.einsum("ni,ij,nj->n", Y, triple.covariance, Y)
    out = 1j * (Y @ triple.shift) - 0.5 * quad_form + _jump_part(triple.measure, Y, tol)
    out = out.reshape(shape)
    return out if out.ndim else complex(out)


def _jump_part(M, Y: np.ndarray, tol: float) -> np.ndarray:
    if isinstance(M, FiniteAtomic):
        if not M.masses.size:
            return np.zeros(Y.shape[0], dtype=complex)
        w = Y @ M.points.T
        inside = (M.norms <= 1.0).astype(float)
        terms = (np.cos(w) - 1.0) + 1j * (np.sin(w) - w * inside)
        return terms @ M.masses
    base = M.base
    if not base.masses.size:
        return np.zeros(Y.shape[0], dtype=complex)
    w = Y @ base.points.T
    law = M.timechange

    def oscillating(s):
        sw = s[:, None, None] * w[None, :, :]
        return (np.cos(sw) - 1.0) + 1j * np.sin(sw)

    smeared = expect_over_law(oscillating, law, tol=tol)
    compensator = law.partial_moment(1, np.minimum(1.0, 1.0 / base.norms))
    return (smeared - 1j * w * compensator) @ base.masses


def b_M(M: FiniteAtomic | Transformed, beta: float) -> np.ndarray:
    """``integral_{||x|| > 1} x ||x||**(-1-beta) M(dx)``."""
    if not isinstance(M, FiniteAtomic):
        raise UnsupportedError("b_M needs a finite atomic measure; compose the multisets instead")
    norms = M.norms
    outside = norms > 1.0
    if not np.any(outside):
        return np.zeros(M.dim)
    weights = M.masses[outside] * norms[outside] ** (-1.0 - float(beta))
    return weights @ M.points[outside]


def transform_single(triple: LevyTriple, beta) -> LevyTriple:
    """Triple of ``J^beta(nu)`` from the closed forms for one exponent."""
    if not isinstance(triple.measure, FiniteAtomic):
        raise UnsupportedError("transform the base triple with the combined multiset instead")
    b = float(beta)
    if not b > 0:
        raise InvalidInputError(f"beta={beta} must be positive")
    shift = b / (b + 1.0) * (triple.shift + b_M(triple.measure, b))
    cov = b / (b + 2.0) * triple.covariance
    law = build_law(BetaMultiset.of(beta))
    return LevyTriple(shift, cov, Transformed(triple.measure, law))


def transform_multi(triple: LevyTriple, multiset: BetaMultiset) -> LevyTriple:
    """Triple of ``J^A(nu)`` through the time change ``r_A`` of ``A``.

    ``R^A = E[T**2] R`` and
    ``a^A = E[T] a + sum over atoms with ||x|| > 1 of m x E[T; T <= 1/||x||]``
    where ``T`` has CDF ``r_A``; both moments are closed-form integrals of
    the law.  Repeated exponents are allowed.
    """
    if not isinstance(triple.measure, FiniteAtomic):
        raise UnsupportedError("transform the base triple with the combined multiset instead")
    law = build_law(multiset)
    M = triple.measure
    shift = float(law.moment(1)) * triple.shift
    if M.masses.size:
        norms = M.norms
        outside = norms > 1.0
        if np.any(outside):
            trunc = law.partial_moment(1, 1.0 / norms[outside])
            shift = shift + (M.masses[outside] * trunc) @ M.points[outside]
    cov = float(law.moment(2)) * triple.covariance
    return LevyTriple(shift, cov, Transformed(M, law))


def measure_eval(M: FiniteAtomic | Transformed, region: BallComplement) -> float:
    """Mass that ``M`` gives to ``{||x|| > radius}``."""
    rho = float(region.radius)
    if isinstance(M, FiniteAtomic):
        return math.fsum(M.masses[M.norms > rho])
    base = M.base
    if not base.masses.size:
        return 0.0
    cut = np.minimum(1.0, rho / base.norms)
    return math.fsum((1.0 - M.timechange.cdf(cut)) * base.masses)


def rescale(triple: LevyTriple, s: float) -> LevyTriple:
    """Triple of ``X -> s X``, so that its exponent at ``y`` is ``Phi(s y)``.

    The shift picks up ``s * sum m x (1_B(s x) - 1_B(x))`` from atoms that
    cross the unit sphere; the measure is the image under ``x -> s x``.
    """
    M = triple.measure
    if not isinstance(M, FiniteAtomic):
        raise UnsupportedError("rescaling is implemented for finite atomic measures")
    if s == 0:
        return LevyTriple.zero(triple.dim)
    norms = M.norms
    crossing = (np.abs(s) * norms <= 1.0).astype(float) - (norms <= 1.0).astype(float)
    shift = s * (triple.shift + (M.masses * crossing) @ M.points)
    return LevyTriple(shift, s * s * triple.covariance, FiniteAtomic(s * M.points, M.masses))


@dataclass(frozen=True, eq=False)
class ConvolutionPowers:
    """Signed combination ``sum_j C_j * (J^{beta_j} nu)`` of single-exponent triples.

    Negative weights are reciprocals of characteristic functions, so the
    combination is only ever evaluated through its parameters.
    """

    weights: tuple
    triples: tuple

    @property
    def shift(self) -> np.ndarray:
        return sum(w * t.shift for w, t in zip(self.weights, self.triples))

    @property
    def covariance(self) -> np.ndarray:
        return sum(w * t.covariance for w, t in zip(self.weights, self.triples))

    def measure_eval(self, region: BallComplement) -> float:
        return math.fsum(w * measure_eval(t.measure, region) for w, t in zip(self.weights, self.triples))

    def exponent(self, y, tol: float = DEFAULT_TOL):
        return logcf_signed_sum(self.triples, self.weights, y, tol=tol)


def decompose(triple: LevyTriple, betas: Sequence) -> ConvolutionPowers:
    """Write ``J^{beta_1..beta_n}(nu)`` as ``sum_j C_j J^{beta_j}(nu)`` (distinct betas only)."""
    C = big_C(list(betas))
    weights = tuple(float(c) for c in C.values)
    triples = tuple(transform_single(triple, b) for b in C.exponents)
    return ConvolutionPowers(weights, triples)


def logcf_signed_sum(triples: Sequence[LevyTriple], C, y, tol: float = DEFAULT_TOL):
    """``sum_j C_j Phi_j(y)`` over single-exponent transformed triples."""
    weights = [float(c) for c in C]
    if len(weights) != len(triples):
        raise DimensionError("one weight per triple is required")
    dims = {t.dim for t in triples}
    if len(dims) != 1:
        raise DimensionError("all triples must share one dimension")
    parts = [w * np.asarray(levy_exponent(t, y, tol=tol)) for w, t in zip(weights, triples)]
    out = sum(parts[1:], parts[0])
    return out if np.ndim(out) else complex(out)
