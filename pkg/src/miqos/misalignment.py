"""Random-orientation model for the mutual inductance ``M = m_max * J``.

The alignment-factor density has a square-root cusp at ``|J| = 1/sqrt(2)``
(the arccos argument hits 1 there).  Polynomial rules converge slowly
across such a point, so every integral over the lower density branch is
carried out in a warped coordinate ``s`` that removes the cusp:

* ``s in [0, 1]`` covers ``|M| in [m_min, m_knee]`` with
  ``M = m_knee - (m_knee - m_min) * (1 - s)**2``;
* ``s in [1, 2]`` covers ``|M| in [m_knee, m_max]`` linearly.

The CDF table and the inverse-CDF sampler use knots that are uniform in
``s``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import InvalidParameterError
from .numerics import QuadratureSpec, gauss_legendre, integrate

__all__ = [
    "J_MIN",
    "J_KNEE",
    "alignment_pdf",
    "MutualInductanceDist",
    "build_distribution",
    "mutual_inductance_pdf",
    "mutual_inductance_cdf",
    "sample",
]

log = logging.getLogger(__name__)

J_MIN = 1.0 / math.sqrt(3.0)
J_KNEE = 1.0 / math.sqrt(2.0)

_PANEL_NODES = 16


def alignment_pdf(j, normalization: float = 1.0):
    """Density of the alignment factor ``J``, scaled by ``normalization``.

    Zero for ``|J| < 1/sqrt(3)`` and ``|J| > 1``; flat at ``3/2`` on
    ``[1/sqrt(2), 1]``; rises from zero on ``[1/sqrt(3), 1/sqrt(2))``.
    """
    j = np.abs(np.asarray(j, dtype=float))
    out = np.zeros_like(j)
    lower = (j >= J_MIN) & (j < J_KNEE)
    jl = j[lower]
    arg = np.clip(jl / np.sqrt(1.0 - jl * jl), -1.0, 1.0)
    out[lower] = 1.5 * (1.0 - (4.0 / math.pi) * np.arccos(arg))
    out[(j >= J_KNEE) & (j <= 1.0)] = 1.5
    # the bracket is exactly zero at J_MIN; rounding can leave a -1e-16
    np.maximum(out, 0.0, out=out)
    out *= normalization
    return float(out) if out.ndim == 0 else out


class _Warp:
    """Map between the warped coordinate ``s in [0, 2]`` and ``|M|``."""

    def __init__(self, m_max: float):
        self.lo = m_max * J_MIN
        self.knee = m_max * J_KNEE
        self.hi = m_max
        self.span_lo = self.knee - self.lo
        self.span_hi = self.hi - self.knee

    def m(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(
            s <= 1.0,
            self.knee - self.span_lo * (1.0 - s) ** 2,
            self.knee + self.span_hi * (s - 1.0),
        )

    def dm_ds(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= 1.0, 2.0 * self.span_lo * (1.0 - s), self.span_hi)

    def s(self, m):
        m = np.clip(np.asarray(m, dtype=float), self.lo, self.hi)
        below = np.clip((self.knee - m) / self.span_lo, 0.0, 1.0)
        return np.where(
            m <= self.knee,
            1.0 - np.sqrt(below),
            1.0 + (m - self.knee) / self.span_hi,
        )


@dataclass(frozen=True, eq=False)
class MutualInductanceDist:
    """Symmetric density of ``M`` on ``m_min <= |M| <= m_max``.

    Build with :func:`build_distribution`; the fields are filled in by the
    normalization and tabulation pass there.

    Attributes
    ----------
    m_max : float
        Coaxial mutual inductance.
    normalization : float
        Constant ``c`` multiplying the alignment density so that it
        integrates to one under the chosen sign reading.
    fold : float
        1.0 if the formula is read as a density over signed ``J``, 0.5 if
        it had to be halved because it integrated to about 2.
    knots_s, knots_cdf : ndarray
        Inverse-CDF table: warped-coordinate knots and the fraction of
        ``|M|`` mass below each knot.
    """

    m_max: float
    normalization: float
    fold: float
    knots_s: np.ndarray = field(repr=False)
    knots_cdf: np.ndarray = field(repr=False)

    @property
    def m_min(self) -> float:
        return self.m_max * J_MIN

    @property
    def m_knee(self) -> float:
        return self.m_max * J_KNEE

    @property
    def support_breakpoints(self) -> tuple[float, float, float]:
        return self.m_min, self.m_knee, self.m_max

    @property
    def convention(self) -> str:
        return "signed" if self.fold == 1.0 else "folded"

    @property
    def _warp(self) -> _Warp:
        return _Warp(self.m_max)

    def alignment_pdf(self, j):
        return alignment_pdf(j, self.fold * self.normalization)

    def pdf(self, m):
        m = np.asarray(m, dtype=float)
        return self.alignment_pdf(m / self.m_max) / self.m_max

    def _density_s(self, s):
        w = self._warp
        return self.pdf(w.m(s)) * w.dm_ds(s)

    def _abs_mass_between(self, s0: np.ndarray, s1: np.ndarray) -> np.ndarray:
        """Fraction of ``|M|`` mass between warped points, with s0, s1 in one branch."""
        x, wts = gauss_legendre(_PANEL_NODES)
        half = 0.5 * (s1 - s0)[..., None]
        nodes = 0.5 * (s1 + s0)[..., None] + half * x
        return 2.0 * (half[..., 0] * (self._density_s(nodes) @ wts))

    def cdf(self, m):
        """``P(M <= m)``, accurate to rounding (table plus a local Gauss panel)."""
        m = np.asarray(m, dtype=float)
        a = np.abs(m)
        s = self._warp.s(a)
        k = np.clip(np.searchsorted(self.knots_s, s, side="right") - 1,
                    0, len(self.knots_s) - 2)
        frac = self.knots_cdf[k] + self._abs_mass_between(self.knots_s[k], s)
        frac = np.where(a < self.m_min, 0.0, np.clip(frac, 0.0, 1.0))
        frac = np.where(a >= self.m_max, 1.0, frac)
        out = 0.5 + 0.5 * np.sign(m) * frac
        return float(out) if out.ndim == 0 else out

    @property
    def cdf_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Signed ``(m, CDF(m))`` table spanning ``[-m_max, m_max]``."""
        m_abs = self._warp.m(self.knots_s)
        m = np.concatenate([-m_abs[::-1], m_abs])
        p = np.concatenate([0.5 - 0.5 * self.knots_cdf[::-1], 0.5 + 0.5 * self.knots_cdf])
        return m, p

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-CDF draws; one uniform per sample (magnitude and sign)."""
        u = rng.random(size)
        v = np.abs(2.0 * u - 1.0)
        s = np.interp(v, self.knots_cdf, self.knots_s)
        out = np.where(u < 0.5, -1.0, 1.0) * self._warp.m(s)
        return float(out) if np.ndim(out) == 0 else out

    def expect(
        self,
        h: Callable[[np.ndarray], np.ndarray],
        breakpoints: Iterable[float] = (),
        quad: QuadratureSpec | None = None,
    ) -> float:
        """``E[h(M)]`` for an integrand even in ``M``.

        ``h`` receives positive ``|M|`` values only.  Kinks of ``h`` given in
        ``breakpoints`` (in henries) are honoured by the quadrature.
        """
        w = self._warp
        inner = [b for b in breakpoints if self.m_min < b < self.m_max]
        s_breaks = [1.0, *np.atleast_1d(w.s(np.array(inner))).tolist()] if inner else [1.0]

        def integrand(s):
            return h(w.m(s)) * self._density_s(s)

        return 2.0 * integrate(integrand, 0.0, 2.0, s_breaks, quad)


def _raw_half_mass(quad: QuadratureSpec | None) -> float:
    """Integral of the unscaled alignment density over ``J in [1/sqrt(3), 1]``."""
    w = _Warp(1.0)

    def f(s):
        return alignment_pdf(w.m(s)) * w.dm_ds(s)

    return integrate(f, 0.0, 2.0, [1.0], quad)


def build_distribution(
    m_max: float,
    grid_size: int = 4096,
    quad: QuadratureSpec | None = None,
) -> MutualInductanceDist:
    """Normalize the alignment density and tabulate the CDF of ``|M|``.

    The printed density is read as a density over signed ``J``.  If it
    integrates to about 2 instead of 1 it is halved (the one-sided
    reading).  Either way the result is rescaled to unit mass; the reading
    and the constant are logged.
    """
    if not (math.isfinite(m_max) and m_max > 0):
        raise InvalidParameterError(f"m_max must be positive, got {m_max!r}")
    if grid_size < 4:
        raise InvalidParameterError("grid_size must be at least 4")

    signed_mass = 2.0 * _raw_half_mass(quad)
    fold = 0.5 if abs(signed_mass - 2.0) < abs(signed_mass - 1.0) else 1.0
    c = 1.0 / (fold * signed_mass)
    log.info(
        "alignment density: raw signed mass %.15g, reading=%s, normalization c=%.15g",
        signed_mass, "signed" if fold == 1.0 else "folded", c,
    )

    n1 = (grid_size + 1) // 2
    n2 = grid_size - n1 + 1
    knots_s = np.concatenate([np.linspace(0.0, 1.0, n1), np.linspace(1.0, 2.0, n2)[1:]])
    partial = MutualInductanceDist(m_max, c, fold, knots_s, np.zeros_like(knots_s))
    masses = partial._abs_mass_between(knots_s[:-1], knots_s[1:])
    cum = np.concatenate([[0.0], np.cumsum(masses)])
    cum /= cum[-1]
    return MutualInductanceDist(m_max, c, fold, knots_s, cum)


def mutual_inductance_pdf(m, dist: MutualInductanceDist):
    return dist.pdf(m)


def mutual_inductance_cdf(m, dist: MutualInductanceDist):
    return dist.cdf(m)


def sample(dist: MutualInductanceDist, rng: np.random.Generator, size=None):
    return dist.sample(rng, size)
