"""Adaptive Gauss-Legendre quadrature against closed-form time changes.

All integrands are vectorized: ``func(s)`` receives a 1-D array of nodes and
returns an array whose leading axis matches it; any trailing axes are
integrated simultaneously and share one refinement tree.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError, QuadratureError
from .product_law import ClosedFormLaw

DEFAULT_TOL = 1e-10
MAX_DEPTH = 20
_EPS = np.finfo(float).eps


@lru_cache(maxsize=None)
def _legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


def _rule(func, lo, hi, order):
    x, w = _legendre(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(func(pts.ravel()))
    vals = vals.reshape((lo.size, order) + vals.shape[1:])
    out = np.tensordot(vals, w, axes=([1], [0])) if vals.ndim == 2 else np.einsum("mj...,j->m...", vals, w)
    return out * half.reshape((-1,) + (1,) * (out.ndim - 1))


def adaptive_gauss_legendre(func, a: float, b: float, tol: float = DEFAULT_TOL,
                            order: int = 15, max_depth: int = MAX_DEPTH):
    """Integrate ``func`` over ``[a, b]`` to absolute tolerance ``tol``.

    Each interval is compared with its two halves; an interval is accepted
    when the difference is below its width share of ``tol`` or at the
    round-off floor.  Unresolved intervals at ``max_depth`` bisections
    raise :class:`QuadratureError` when their summed error exceeds ``tol``.
    """
    if not b > a:
        raise InvalidInputError(f"empty interval [{a}, {b}]")
    lo = np.array([float(a)])
    hi = np.array([float(b)])
    coarse = _rule(func, lo, hi, order)
    total = np.zeros(coarse.shape[1:], dtype=coarse.dtype)
    residual = 0.0
    width = float(b - a)
    depth = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        left = _rule(func, lo, mid, order)
        right = _rule(func, mid, hi, order)
        fine = left + right
        tail_axes = tuple(range(1, fine.ndim))
        err = np.abs(fine - coarse).max(axis=tail_axes) if tail_axes else np.abs(fine - coarse)
        size = np.abs(fine).max(axis=tail_axes) if tail_axes else np.abs(fine)
        ok = (err <= tol * (hi - lo) / width) | (err <= 64 * _EPS * size)
        depth += 1
        if depth >= max_depth:
            residual += float(err[~ok].sum())
            ok[:] = True
        total = total + fine[ok].sum(axis=0)
        keep = ~ok
        lo, hi, mid = lo[keep], hi[keep], mid[keep]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        coarse = np.concatenate([left[keep], right[keep]])
    if residual > tol:
        raise QuadratureError("adaptive Gauss-Legendre did not converge", residual)
    return total


def expect_over_law(func, law: ClosedFormLaw, tol: float = DEFAULT_TOL):
    """``integral_0^1 func(s) dr(s)`` where ``r`` is the CDF of ``law``.

    Each term ``c s**(e-1) (-log s)**j`` is integrated separately after the
    substitution ``s = w**(p/e)`` with ``p = j + 1 + ceil(e)``, which turns
    the term weight into ``(p/e)**(j+1) w**(p-1) (-log w)**j``: bounded at
    ``w = 0`` and smooth enough there for Gauss-Legendre.
    """
    terms = law.terms
    if not terms:
        raise InvalidInputError("law has no terms")
    if any(e <= 0 for _, e, _ in terms):
        raise InvalidInputError("expectations need positive term exponents")
    total = None
    for c, e, j in terms:
        e = float(e)
        p = j + 1 + math.ceil(e)
        q = p / e
        scale = float(c) * q ** (j + 1)

        def integrand(w, q=q, p=p, j=j):
            weight = w ** (p - 1) * (-np.log(w)) ** j
            vals = np.asarray(func(w ** q))
            return vals * weight.reshape((-1,) + (1,) * (vals.ndim - 1))

        part = scale * adaptive_gauss_legendre(
            integrand, 0.0, 1.0, tol=tol / (len(terms) * max(abs(scale), 1.0)))
        total = part if total is None else total + part
    return total


class RayCarrier:
    """Chebyshev interpolant of a vector-valued function of ``u`` in ``[0, 1]``.

    Nested compositions evaluate the inner log-characteristic function only
    along the rays ``u * y``; the carrier stores that one-dimensional
    dependence so the next layer can integrate it without re-running the
    inner quadrature at every node.
    """

    def __init__(self, coef: np.ndarray):
        self.coef = coef

    @classmethod
    def fit(cls, func, abs_tol: float = 1e-11, rel_tol: float = 1e-13,
            start: int = 16, max_nodes: int = 1024) -> "RayCarrier":
        n = start
        while True:
            theta = math.pi * (np.arange(n) + 0.5) / n
            u = 0.5 * (np.cos(theta) + 1.0)
            vals = np.asarray(func(u))
            basis = np.cos(np.outer(np.arange(n), theta))
            coef = (2.0 / n) * np.tensordot(basis, vals, axes=([1], [0]))
            coef[0] = coef[0] / 2
            scale = float(np.abs(coef).max()) if coef.size else 0.0
            tail = float(np.abs(coef[-4:]).max())
            if tail <= max(abs_tol, rel_tol * scale):
                return cls(coef)
            if n >= max_nodes:
                raise QuadratureError("Chebyshev carrier did not resolve the layer", tail)
            n *= 2

    def __call__(self, u) -> np.ndarray:
        x = 2.0 * np.asarray(u, dtype=float) - 1.0
        out = np.polynomial.chebyshev.chebval(x, self.coef)
        # chebval puts the evaluation axis last
        return np.moveaxis(out, -1, 0) if out.ndim > 1 else out
