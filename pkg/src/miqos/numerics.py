"""Quadrature and root-finding kernels.

Both kernels are written for the integrands that show up in this package:
piecewise smooth functions whose kinks are known in advance (policy
thresholds, density branch edges).  Callers pass those kinks as
breakpoints so every panel the rule sees is smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Literal

import numpy as np

from .errors import ConvergenceError, InvalidParameterError, NoRootError

__all__ = [
    "QuadratureSpec",
    "RootSpec",
    "integrate",
    "solve_monotone_root",
    "gauss_legendre",
]

Method = Literal["adaptive-simpson", "fixed-gauss-legendre"]


@dataclass(frozen=True)
class QuadratureSpec:
    method: Method = "fixed-gauss-legendre"
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2 ** 16
    gauss_nodes: int = 256

    def __post_init__(self):
        if self.method not in ("adaptive-simpson", "fixed-gauss-legendre"):
            raise InvalidParameterError(f"unknown quadrature method {self.method!r}")
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidParameterError("quadrature tolerances must be positive")
        if self.max_subdivisions < 2 or self.gauss_nodes < 2:
            raise InvalidParameterError("node and subdivision counts must be >= 2")


@dataclass(frozen=True)
class RootSpec:
    abs_tol: float = 1e-12
    max_iters: int = 200
    bracket_expansion: float = 10.0

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise InvalidParameterError("root tolerance must be positive")
        if self.max_iters < 1:
            raise InvalidParameterError("max_iters must be >= 1")
        if not self.bracket_expansion > 1:
            raise InvalidParameterError("bracket_expansion must exceed 1")


@lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _gl_panels(f, lo: np.ndarray, hi: np.ndarray, n: int):
    """Integrate f over many panels at once with an n-point and an n/2-point rule."""
    x, w = gauss_legendre(n)
    xh, wh = gauss_legendre(max(n // 2, 1))
    half = 0.5 * (hi - lo)[:, None]
    mid = 0.5 * (hi + lo)[:, None]
    nodes = np.concatenate([mid + half * x, mid + half * xh], axis=1)
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    fine = (half[:, 0]) * (vals[:, :n] @ w)
    coarse = (half[:, 0]) * (vals[:, n:] @ wh)
    return fine, np.abs(fine - coarse)


def _simpson_panels(f, lo: np.ndarray, hi: np.ndarray, n: int):
    """Simpson on each panel versus composite Simpson on its two halves."""
    t = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    nodes = lo[:, None] + (hi - lo)[:, None] * t
    v = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    h = hi - lo
    whole = h / 6.0 * (v[:, 0] + 4 * v[:, 2] + v[:, 4])
    halves = h / 12.0 * (v[:, 0] + 4 * v[:, 1] + 2 * v[:, 2] + 4 * v[:, 3] + v[:, 4])
    err = np.abs(halves - whole) / 15.0
    # Richardson extrapolation of the pair
    return halves + (halves - whole) / 15.0, err


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    breakpoints: Iterable[float] = (),
    spec: QuadratureSpec | None = None,
) -> float:
    """Integrate a vectorized function piecewise between breakpoints.

    Parameters
    ----------
    f : callable
        Accepts a 1-D array of abscissae and returns values of the same shape.
    lo, hi : float
        Integration limits, ``lo <= hi``.
    breakpoints : iterable of float
        Points where ``f`` may be non-smooth.  Points outside ``(lo, hi)``
        are ignored.
    spec : QuadratureSpec, optional
        Rule and tolerances; defaults to ``QuadratureSpec()``.

    Returns
    -------
    float
        The integral estimate.

    Raises
    ------
    ConvergenceError
        If the panel budget ``spec.max_subdivisions`` runs out before the
        error estimate meets ``max(abs_tol, rel_tol * |I|)``.  The best
        estimate is attached to the exception.
    """
    spec = spec or QuadratureSpec()
    if not lo <= hi:
        raise InvalidParameterError(f"integration limits out of order: {lo} > {hi}")
    if lo == hi:
        return 0.0
    edges = sorted({lo, hi, *(float(b) for b in breakpoints if lo < b < hi)})
    a = np.array(edges[:-1])
    b = np.array(edges[1:])
    rule = _gl_panels if spec.method == "fixed-gauss-legendre" else _simpson_panels
    width = hi - lo

    accepted = 0.0
    n_panels = len(a)
    while True:
        est, err = rule(f, a, b, spec.gauss_nodes)
        total = accepted + est.sum()
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        ok = err <= tol * (b - a) / width
        accepted += est[ok].sum()
        if ok.all():
            return float(accepted)
        a, b = a[~ok], b[~ok]
        n_panels += len(a)
        if n_panels > spec.max_subdivisions:
            raise ConvergenceError(
                f"quadrature did not reach tolerance {tol:.3g} within "
                f"{spec.max_subdivisions} panels",
                estimate=float(total),
                residual=float(err[~ok].sum()),
            )
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])


def solve_monotone_root(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    spec: RootSpec | None = None,
) -> float:
    """Bisection for a monotone scalar function.

    If ``g(lo)`` and ``g(hi)`` share a sign, the bracket is widened about its
    centre by ``spec.bracket_expansion`` per step, at most eight times.
    Bisection then runs until ``|g(x)| <= abs_tol`` or the bracket can no
    longer be split in floating point.  The returned point is the iterate
    with the smallest residual seen.
    """
    spec = spec or RootSpec()
    if not lo < hi:
        raise InvalidParameterError(f"empty bracket [{lo}, {hi}]")
    g_lo, g_hi = g(lo), g(hi)
    centre, width = 0.5 * (lo + hi), hi - lo
    expansions = 0
    while g_lo * g_hi > 0:
        if expansions == 8:
            raise NoRootError(
                "no sign change after bracket expansion", lo, hi, g_lo, g_hi
            )
        expansions += 1
        width *= spec.bracket_expansion
        lo, hi = centre - 0.5 * width, centre + 0.5 * width
        g_lo, g_hi = g(lo), g(hi)

    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    best_x, best_r = (lo, abs(g_lo)) if abs(g_lo) < abs(g_hi) else (hi, abs(g_hi))
    for _ in range(spec.max_iters):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return best_x
        g_mid = g(mid)
        if abs(g_mid) < best_r:
            best_x, best_r = mid, abs(g_mid)
        if best_r <= spec.abs_tol:
            return best_x
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    if best_r <= spec.abs_tol or math.isclose(lo, hi, rel_tol=1e-15, abs_tol=0.0):
        return best_x
    raise ConvergenceError(
        f"bisection stopped after {spec.max_iters} iterations",
        estimate=best_x,
        residual=best_r,
    )
