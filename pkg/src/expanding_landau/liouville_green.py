"""Liouville-Green (WKB) machinery for w'' + a(x) w = 0 with a > 0.

The approximate fundamental pair is a^{-1/4} sin(xi_a), a^{-1/4} cos(xi_a)
with phase xi_a(x) = int sqrt(a); the neglected error is never built,
only its bound exp(V) - 1 in terms of the total variation
V = int a^{-1/4} |(a^{-1/4})''|.  A tightly-tolerated adaptive reference
integrator and the variation-of-parameters solver (Wronskian -1) complete
the toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp


@dataclass
class LGBasis:
    """Positive coefficient a on (b_minus, b_plus) with its phase integral.

    ``a_quarter_d2`` optionally supplies (a^{-1/4})'' analytically;
    otherwise centered finite differences with relative step 1e-4 are
    used for the error budget.
    """

    a_func: Callable[[float], float]
    interval: tuple
    a_quarter_d2: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        lo, hi = self.interval
        if not lo < hi:
            raise ValueError("interval must be nondegenerate")
        probe = np.linspace(lo, min(hi, lo + 10.0), 17)
        if np.any(np.asarray([self.a_func(x) for x in probe]) <= 0):
            raise ValueError("coefficient a must be positive on the interval")

    def _check(self, x: float):
        lo, hi = self.interval
        if not lo <= x <= hi:
            raise ValueError(f"x = {x:g} outside [{lo:g}, {hi:g}]")

    def xi(self, x: float) -> float:
        """Phase xi_a(x) = int_{b-}^x sqrt(a)."""
        self._check(x)
        val, _ = quad(lambda y: np.sqrt(self.a_func(y)), self.interval[0], x,
                      limit=400)
        return val

    def _d2_inv_quarter(self, x: float) -> float:
        if self.a_quarter_d2 is not None:
            return self.a_quarter_d2(x)
        h = 1e-4 * max(1.0, abs(x))
        lo, hi = self.interval
        x0 = min(max(x, lo + h), hi - h) if hi - lo > 2 * h else x
        f = lambda y: self.a_func(y) ** -0.25
        return (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / h ** 2


def lg_fundamental(basis: LGBasis, x: float):
    """Leading-order pair (a^{-1/4} sin(xi), a^{-1/4} cos(xi))."""
    basis._check(x)
    amp = basis.a_func(x) ** -0.25
    ph = basis.xi(x)
    return amp * np.sin(ph), amp * np.cos(ph)


def lg_error_budget(basis: LGBasis, x: float):
    """(variation V on (b-, x), bound exp(V) - 1)."""
    basis._check(x)
    integrand = lambda y: basis.a_func(y) ** -0.25 * abs(basis._d2_inv_quarter(y))
    V, _ = quad(integrand, basis.interval[0], x, limit=400)
    return V, np.expm1(V)


def reference_ivp(basis: LGBasis, q_source, x0: float, v0, grid):
    """High-accuracy solution samples of u'' + a u = q on the grid.

    Adaptive Runge-Kutta with 1e-11/1e-13 tolerances; raises if the step
    controller fails.
    """
    grid = np.asarray(grid, dtype=float)
    if abs(grid[0] - x0) > 1e-12:
        raise ValueError("x0 must coincide with the first grid node")

    def deriv(x, y):
        return [y[1], q_source(x) - basis.a_func(x) * y[0]]

    sol = solve_ivp(deriv, (x0, grid[-1]), list(v0), t_eval=grid,
                    method="RK45", rtol=1e-11, atol=1e-13, max_step=0.1)
    if not sol.success:
        raise RuntimeError(f"reference integrator failed: {sol.message}")
    return sol.y[0]


def reference_ivp_pair(basis: LGBasis, q_source, x0: float, v0, grid):
    """Like reference_ivp but returns (u, u') samples."""
    grid = np.asarray(grid, dtype=float)

    def deriv(x, y):
        return [y[1], q_source(x) - basis.a_func(x) * y[0]]

    sol = solve_ivp(deriv, (x0, grid[-1]), list(v0), t_eval=grid,
                    method="RK45", rtol=1e-11, atol=1e-13, max_step=0.1)
    if not sol.success:
        raise RuntimeError(f"reference integrator failed: {sol.message}")
    return sol.y[0], sol.y[1]


def wronskian_defect(basis: LGBasis, w1, w2, grid,
                     dw1=None, dw2=None) -> float:
    """max |w1 w2' - w2 w1' + 1| over the grid.

    Derivatives are taken from ``dw1``/``dw2`` when supplied, otherwise
    by centered finite differences with a grid-scale step.
    """
    grid = np.asarray(grid, dtype=float)
    if dw1 is None or dw2 is None:
        h = 1e-6 * max(1.0, float(np.max(np.abs(grid))))
        fd = lambda f: lambda x: (f(x + h) - f(x - h)) / (2.0 * h)
        dw1 = dw1 or fd(w1)
        dw2 = dw2 or fd(w2)
    W = np.array([w1(x) * dw2(x) - w2(x) * dw1(x) for x in grid])
    return float(np.max(np.abs(W + 1.0)))


def inhomogeneous_vp(basis: LGBasis, w1, w2, q_source, grid):
    """Variation-of-parameters solution with zero initial data.

    u(x) = -int_{b-}^x [w1(y) w2(x) - w2(y) w1(x)] q(y) dy, assuming the
    pair has Wronskian -1; evaluated with cumulative trapezoids.
    """
    grid = np.asarray(grid, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if w1.shape != grid.shape or w2.shape != grid.shape:
        raise ValueError("fundamental pair must be sampled on the grid")
    q = np.asarray([q_source(x) for x in grid], dtype=float)

    def cumtrapz(f):
        out = np.zeros_like(f)
        out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(grid))
        return out

    return -(w2 * cumtrapz(w1 * q) - w1 * cumtrapz(w2 * q))
