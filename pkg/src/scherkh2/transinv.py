"""Entire minimal graphs invariant under the hyperbolic translations along a geodesic.

In the half-plane chart take the geodesic ``gamma = {x = 0}``; translations
along it are the dilations ``w -> e^s w``.  A dilation-invariant graph is
``u(x, y) = f(alpha)`` with ``alpha = atan2(y, x)`` in ``(0, pi)``, and the
minimal-graph equation reduces to

    f'' = sin(alpha) cos(alpha) f'^3,

which integrates once to ``f' = 1 / sqrt(K - sin^2 alpha)`` with ``K > 1``.
The odd solution with ``f(0+) = -t`` and ``f(pi-) = +t`` has

    f(alpha) = (F(alpha | m) - K(m)) / sqrt(K),    m = 1/K,

where ``t = sqrt(m) K(m)`` fixes ``m`` (``F`` and ``K`` are Legendre's
incomplete and complete elliptic integrals of the first kind).  Along
``gamma`` the graph has ``nu = sqrt(1 - m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import elliprf

from .curvature import Jet2


@dataclass(frozen=True)
class TranslationInvariantProblem:
    t: float
    n_alpha: int = 2001

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.n_alpha < 3:
            raise ValueError("angular grid needs at least three points")


def _complete_k(p: float) -> float:
    """K(m) written through the complementary parameter ``p = 1 - m``."""
    return float(elliprf(0.0, p, 1.0))


def _t_of_p(p: float) -> float:
    return math.sqrt(1.0 - p) * _complete_k(p)


def solve_complement(t: float) -> float:
    """Complementary parameter ``p = 1 - m`` with ``sqrt(m) K(m) = t``.

    Root finding runs in ``log p`` so that large ``t`` (where ``p`` decays
    like ``16 exp(-2t)``) keeps full relative accuracy in ``p``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    lo = math.log(np.finfo(float).tiny)
    if _t_of_p(math.exp(lo)) < t:
        raise ValueError(f"t = {t} is beyond double precision for this profile")
    if t < 1.0:
        m = brentq(lambda m: _t_of_p(1.0 - m) - t, 0.0, 0.9, xtol=1e-300,
                   rtol=4 * np.finfo(float).eps, maxiter=500)
        return 1.0 - m
    lp = brentq(lambda lp: _t_of_p(math.exp(lp)) - t, lo, math.log(0.95),
                xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(lp)


def solve_modulus(t: float) -> float:
    """Parameter ``m`` in (0, 1) with ``sqrt(m) K(m) = t`` (rounded; see :func:`solve_complement`)."""
    return 1.0 - solve_complement(t)


class TranslationInvariantGraph:
    """Profile ``f`` of ``v_t`` and the jets of ``u = f(alpha)``.

    Elliptic integrals are evaluated in Carlson form with ``p = 1 - m`` so
    that nothing is lost when ``m`` is close to 1.
    """

    def __init__(self, t: float, p: float, n_alpha: int = 2001):
        self.t = t
        self.p = p
        self.m = 1.0 - p
        self._sqrtK = 1.0 / math.sqrt(self.m)
        self._Km = _complete_k(p)
        self.alpha = np.linspace(0.0, math.pi, n_alpha)[1:-1]
        self.values = self.f(self.alpha)

    def _q(self, alpha):
        # 1 - m sin^2 = cos^2 + p sin^2
        s, c = np.sin(alpha), np.cos(alpha)
        return c * c + self.p * s * s

    def f(self, alpha):
        a = np.asarray(alpha, float)
        sgn = np.where(a > 0.5 * np.pi, -1.0, 1.0)
        b = np.where(a > 0.5 * np.pi, np.pi - a, a)
        c = np.cos(b)
        F = np.sin(b) * elliprf(c * c, self._q(b), 1.0)
        return sgn * (F - self._Km) / self._sqrtK

    def df(self, alpha):
        # f' = 1 / sqrt(K - sin^2) with K = 1/m
        return np.sqrt(self.m / self._q(alpha))

    def d2f(self, alpha):
        return np.sin(alpha) * np.cos(alpha) * self.df(alpha) ** 3

    def __call__(self, x, y):
        return self.f(np.arctan2(y, x))

    def derivatives(self, x, y):
        """(u, u_x, u_y, u_xx, u_xy, u_yy) at half-plane points (vectorised)."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        a = np.arctan2(y, x)
        r2 = x * x + y * y
        r = np.sqrt(r2)
        c, s = np.cos(a), np.sin(a)
        f1, f2 = self.df(a), self.d2f(a)
        ux = -f1 * s / r
        uy = f1 * c / r
        uxx = (f2 * s * s + 2 * f1 * s * c) / r2
        uyy = (f2 * c * c - 2 * f1 * s * c) / r2
        uxy = (-f2 * s * c + f1 * (s * s - c * c)) / r2
        return self.f(a), ux, uy, uxx, uxy, uyy

    def jet(self, x: float, y: float) -> Jet2:
        return Jet2(x, y, *(float(v) for v in self.derivatives(x, y)))

    def nu_on_gamma(self) -> float:
        """nu along the axis ``x = 0`` (constant by dilation invariance)."""
        return math.sqrt(self.p)


def solve_translation_invariant(prob: TranslationInvariantProblem | float) -> TranslationInvariantGraph:
    if not isinstance(prob, TranslationInvariantProblem):
        prob = TranslationInvariantProblem(float(prob))
    return TranslationInvariantGraph(prob.t, solve_complement(prob.t), prob.n_alpha)
