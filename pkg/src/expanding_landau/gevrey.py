"""Gevrey multipliers, norms and the generator-function diagnostics.

The multiplier A(z)_{k,xi} = exp(z <k,xi>^gamma) <k,xi>^sigma with the
Japanese bracket <k,xi> = sqrt(1 + |k|^2 + |xi|^2) weights both the
density generator F (a sup over nonzero spatial modes along xi = k tau)
and the distribution generator G (a weighted square integral including
up to d momentum-frequency derivatives).  The sliding radius
z(tau) = lambda1 (1 + <tau>^{-delta}) trades analyticity for decay.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GevreyParams:
    gamma: float = 0.8
    sigma: float = 0.0
    alpha: float = 1.0
    lambda0: float = 0.4
    lambda1: float = 0.1
    delta: float = 0.5
    theta0: float = 1.0

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 1.0 / 3.0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (1/3, 1]")
        if not 0 < self.lambda0 <= 1:
            raise ValueError("lambda0 must lie in (0, 1]")
        if self.lambda1 > self.lambda0 / 4:
            raise ValueError("lambda1 must be <= lambda0 / 4")
        if self.lambda1 <= 0 or self.delta <= 0:
            raise ValueError("lambda1 and delta must be positive")
        if self.gamma == 1 and self.lambda1 >= self.theta0 / 2:
            raise ValueError("gamma = 1 requires lambda1 < theta0 / 2")

    def theorem_admissible(self, beta: float) -> tuple[bool, bool]:
        """Whether (gamma, sigma) meet the main-decay thresholds for beta.

        Returns (gamma_ok, sigma_ok) for gamma > 1 - 2/(3 + beta + beta')
        and sigma > max(4, 2 + beta + beta') with beta' = 3 beta / 2.
        """
        bp = 1.5 * beta
        return (self.gamma > 1.0 - 2.0 / (3.0 + beta + bp),
                self.sigma > max(4.0, 2.0 + beta + bp))


def bracket(k, xi):
    """<k, xi> = sqrt(1 + |k|^2 + |xi|^2), elementwise."""
    k = np.asarray(k, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(1.0 + k ** 2 + xi ** 2)


def multiplier_A(p: GevreyParams, z: float, k, xi):
    """A(z)_{k,xi} = exp(z <k,xi>^gamma) <k,xi>^sigma."""
    if not 0 <= z <= 1:
        raise ValueError("z must lie in [0, 1]")
    br = bracket(k, xi)
    return np.exp(z * br ** p.gamma) * br ** p.sigma


def sliding_z(p: GevreyParams, tau) -> float:
    """z(tau) = lambda1 (1 + <tau>^{-delta}); decreases from 2 lambda1."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    out = p.lambda1 * (1.0 + (1.0 + tau ** 2) ** (-p.delta / 2.0))
    return out if out.ndim else float(out)


def generator_F(p: GevreyParams, density_modes: dict, tau: float,
                z: float) -> float:
    """sup over k != 0 of A(z)_{k, k tau} |k|^{-alpha} |rho_k|.

    The sup is truncated to the supplied mode set (a lower bound of the
    lattice sup); the modulus reading of the density factor is used.
    """
    best = 0.0
    for k, rho in density_modes.items():
        if k == 0:
            continue
        val = multiplier_A(p, z, k, k * tau) * abs(k) ** (-p.alpha) * abs(rho)
        best = max(best, float(val))
    return best


def generator_G(p: GevreyParams, h_hat: np.ndarray, modes: np.ndarray,
                xi_grid: np.ndarray, z: float, d: int = 1) -> float:
    """Riemann-sum G: sum_{j<=d} sum_k int A(z)^2 |D^j_xi h^|^2 dxi.

    xi-derivatives use 4th-order finite-difference stencils (one-sided at
    the grid ends) applied j times.
    """
    n = len(xi_grid)
    if n < 8 * d:
        raise ValueError("xi-grid too small for the requested derivatives")
    dxi = xi_grid[1] - xi_grid[0]
    A2 = multiplier_A(p, z, modes[:, None], xi_grid[None, :]) ** 2
    total = 0.0
    deriv = h_hat
    for j in range(d + 1):
        total += float(np.sum(A2 * np.abs(deriv) ** 2) * dxi)
        if j < d:
            deriv = fd_derivative(deriv, dxi)
    return total


def gevrey_norm_torus(p: GevreyParams, density_modes: dict, z: float) -> float:
    """sqrt( sum_k exp(2 z <k>^gamma) <k>^{2 sigma} |rho_k|^2 )."""
    acc = 0.0
    for k, rho in density_modes.items():
        br = np.sqrt(1.0 + float(k) ** 2)
        acc += np.exp(2.0 * z * br ** p.gamma) * br ** (2.0 * p.sigma) \
            * abs(rho) ** 2
    return float(np.sqrt(acc))


# 4th-order first-derivative stencils: interior central, one-sided at ends
_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_FORWARD = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def fd_derivative(arr: np.ndarray, dx: float) -> np.ndarray:
    """d/dxi along the last axis, 4th-order stencils."""
    out = np.zeros_like(arr)
    out[..., 2:-2] = (
        _CENTRAL[0] * arr[..., :-4] + _CENTRAL[1] * arr[..., 1:-3]
        + _CENTRAL[3] * arr[..., 3:-1] + _CENTRAL[4] * arr[..., 4:]
    )
    for i in (0, 1):
        out[..., i] = np.tensordot(arr[..., i:i + 5], _FORWARD, axes=([-1], [0]))
        out[..., -1 - i] = -np.tensordot(arr[..., -5 - i: arr.shape[-1] - i],
                                         _FORWARD[::-1], axes=([-1], [0]))
    return out / dx
