"""Background equilibria and the per-mode Volterra kernels.

Two families are shipped: the Poisson/Cauchy equilibrium with Fourier
transform exp(-theta0 |xi|), whose exactness drives the whole linear
theory, and a Maxwellian used for the Jeans-length stability test.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cosmology import ScaleFactorModel, a_of_T


class EquilibriumKind(Enum):
    POISSON_FAMILY = "poisson"
    MAXWELLIAN = "maxwellian"


@dataclass(frozen=True)
class Equilibrium:
    kind: EquilibriumKind
    theta0: float = 1.0       # Poisson momentum scale
    temperature: float = 1.0  # Maxwellian
    rho0: float = 1.0         # Maxwellian mean density
    dim: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.kind is EquilibriumKind.POISSON_FAMILY and self.theta0 <= 0:
            raise ValueError("theta0 must be positive")
        if self.kind is EquilibriumKind.MAXWELLIAN:
            if self.temperature <= 0 or self.rho0 <= 0:
                raise ValueError("temperature and rho0 must be positive")

    @classmethod
    def poisson(cls, theta0: float = 1.0, dim: int = 1):
        return cls(EquilibriumKind.POISSON_FAMILY, theta0=theta0, dim=dim)

    @classmethod
    def maxwellian(cls, temperature: float = 1.0, rho0: float = 1.0, dim: int = 1):
        return cls(EquilibriumKind.MAXWELLIAN, temperature=temperature,
                   rho0=rho0, dim=dim)

    @property
    def momentum_scale(self) -> float:
        """Inverse decay rate of mu_hat, used for xi-window sizing."""
        if self.kind is EquilibriumKind.POISSON_FAMILY:
            return 1.0 / self.theta0
        return float(np.sqrt(self.temperature))


@dataclass(frozen=True)
class InteractionSign:
    """eps_F = -1 repulsive/electrostatic, +1 attractive/gravitational."""

    eps_F: int

    def __post_init__(self):
        if self.eps_F not in (-1, 1):
            raise ValueError("eps_F must be -1 or +1")


REPULSIVE = InteractionSign(-1)
ATTRACTIVE = InteractionSign(+1)


def mu_hat(eq: Equilibrium, xi):
    """Fourier transform of the background at momentum frequency xi.

    Poisson: exp(-theta0 |xi|).  Maxwellian: rho0 exp(-T |xi|^2 / 2).
    Scalars and arrays are treated elementwise (signed input allowed);
    pass |xi| for genuine d-vectors.
    """
    r = _abs(xi)
    if eq.kind is EquilibriumKind.POISSON_FAMILY:
        return np.exp(-eq.theta0 * r)
    return eq.rho0 * np.exp(-eq.temperature * r ** 2 / 2.0)


def mu_value(eq: Equilibrium, v):
    """Real-space background density at velocity v.

    Poisson family: d=3 gives (1/pi^2) theta0/(theta0^2+|v|^2)^2; d=1 the
    Cauchy density (theta0/pi)/(theta0^2+v^2), which shares the Fourier
    transform exp(-theta0|xi|).
    """
    r = _abs(v)
    if eq.kind is EquilibriumKind.POISSON_FAMILY:
        th = eq.theta0
        if eq.dim == 3:
            return (1.0 / np.pi ** 2) * th / (th ** 2 + r ** 2) ** 2
        if eq.dim == 1:
            return (th / np.pi) / (th ** 2 + r ** 2)
        raise ValueError(f"no closed-form Poisson profile for dim={eq.dim}")
    T, d = eq.temperature, eq.dim
    return eq.rho0 * (2.0 * np.pi * T) ** (-d / 2.0) * np.exp(-r ** 2 / (2.0 * T))


def kernel_M(eq: Equilibrium, k, s):
    """Mode kernel M_k(s) = s mu_hat(k s); vanishes at s = 0."""
    kabs = _abs(k)
    if np.any(np.asarray(kabs) == 0):
        raise ValueError("mode k must be nonzero")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("lag s must be >= 0")
    out = s * mu_hat(eq, kabs * s)
    return out if out.ndim else float(out)


def kernel_K(eq: Equilibrium, model: ScaleFactorModel, sign: InteractionSign,
             k, tau, tau_tilde, dim_power: float = 1.0):
    """Volterra kernel K_k(tau, tau_tilde).

    4 pi eps_F M_k(tau - tau_tilde) a(T(tau_tilde))^p for tau >= tau_tilde,
    zero otherwise; eps_F = -1 recovers the electrostatic -4 pi form, and
    p = 4 - d covers the high-dimensional kernels.
    """
    kabs = _abs(k)
    if np.any(np.asarray(kabs) == 0):
        raise ValueError("mode k must be nonzero")
    tau = np.asarray(tau, dtype=float)
    tt = np.asarray(tau_tilde, dtype=float)
    s = tau - tt
    live = s >= 0
    s_safe = np.where(live, s, 0.0)
    val = 4.0 * np.pi * sign.eps_F * s_safe * mu_hat(eq, kabs * s_safe) \
        * a_of_T(model, np.where(live, tt, 0.0)) ** dim_power
    out = np.where(live, val, 0.0)
    return out if out.ndim else float(out)


def _abs(y):
    """Elementwise magnitude; pass the Euclidean norm yourself for d-vectors."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 0:
        return float(abs(y))
    return np.abs(y)
