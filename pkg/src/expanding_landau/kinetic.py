"""Nonlinear spectral solver for the renormalized kinetic system.

The state is h^(tau, k, xi) on modes -K..K times a uniform xi-grid; in
these variables free transport is frozen out entirely, the mean-field
term couples mode k to its own density sample rho_k(tau) = h^(tau, k,
k tau), and the quadratic term is a mode convolution with xi-shifts
l tau realized by cubic interpolation:

  d h^/dtau (k, xi) = -sf 4 pi a(T(tau)) (k.(xi - k tau)/|k|^2) rho_k mu^(xi - k tau)
                      + sf 4 pi a(T(tau)) sum_{l != 0} (l.(xi - k tau)/|l|^2)
                                           rho_l h^(k - l, xi - l tau)

with sf = -eps_F, so the repulsive (eps_F = -1) case carries the
electrostatic signs.  The k = 0 row is identically zero: its linear
coefficient vanishes at (0, 0), rho_0 = 0 by charge neutrality, and the
conjugate pairing of the l and -l convolution terms cancels the
remainder, so we force it exactly.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .cosmology import ScaleFactorModel, a_of_T, t_of_tau
from .equilibrium import Equilibrium, InteractionSign, mu_hat
from .gevrey import GevreyParams, generator_F, generator_G, gevrey_norm_torus, \
    sliding_z


class SimMode(Enum):
    FREE_STREAMING = "free_streaming"
    LINEARIZED = "linearized"
    FULL_NONLINEAR = "full_nonlinear"


class BlowUpError(RuntimeError):
    """Non-finite state detected; carries the renormalized time."""

    def __init__(self, tau: float):
        super().__init__(f"non-finite state at tau = {tau:g}")
        self.tau = tau


@dataclass(frozen=True)
class SimConfig:
    k_max: int
    xi_max: float
    n_xi: int
    dtau: float
    tau_end: float
    mode: SimMode
    model: ScaleFactorModel
    eq: Equilibrium
    sign: InteractionSign
    epsilon: float = 1e-3
    dim: int = 1

    def __post_init__(self):
        if self.n_xi < 64:
            raise ValueError("n_xi must be >= 64")
        if self.dtau <= 0 or self.tau_end <= 0:
            raise ValueError("dtau and tau_end must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.mode is not SimMode.FREE_STREAMING:
            # every shifted evaluation point xi - l tau must stay inside
            # the window, with six e-foldings of mu^ decay margin
            need = self.k_max * self.tau_end + 6.0 * self.eq.momentum_scale
            if self.xi_max < need:
                raise ValueError(
                    f"xi_max = {self.xi_max:g} < required window {need:g} "
                    f"(k_max * tau_end + 6 * momentum scale)")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    @property
    def xi_grid(self) -> np.ndarray:
        return np.linspace(-self.xi_max, self.xi_max, self.n_xi)


@dataclass
class SpectralState:
    tau: float
    h_hat: np.ndarray  # complex, shape (2 k_max + 1, n_xi)

    def copy(self) -> "SpectralState":
        return SpectralState(self.tau, self.h_hat.copy())

    def reality_defect(self) -> float:
        """max |h^(-k, -xi) - conj(h^(k, xi))| on matching grid points."""
        flipped = np.conj(self.h_hat[::-1, ::-1])
        return float(np.max(np.abs(self.h_hat - flipped)))

    def neutrality_defect(self, cfg: SimConfig) -> float:
        """|h^(0, xi = 0)|; zero for charge-neutral real data."""
        k0 = cfg.k_max
        i0 = int(np.argmin(np.abs(cfg.xi_grid)))
        return float(np.abs(self.h_hat[k0, i0]))


def init_state(cfg: SimConfig, coefficients: dict,
               phi: Optional[Callable] = None,
               normalize: bool = False,
               gevrey: Optional[GevreyParams] = None) -> SpectralState:
    """Separable initial data h^(0, k, xi) = c_k phi(xi).

    Missing negative modes are mirrored as c_{-k} = conj(c_k); supplying
    both with a mismatch, or a nonzero c_0, is rejected.  With
    ``normalize`` the amplitudes are rescaled so the phase-space Gevrey
    norm of the data (at z = lambda0) equals cfg.epsilon ** 2.
    """
    if phi is None:
        phi = lambda xi: np.exp(-xi ** 2 / 2.0)
    c = dict(coefficients)
    if c.get(0, 0) != 0:
        raise ValueError("charge neutrality requires c_0 = 0")
    for k in list(c):
        if -k in c:
            if abs(c[-k] - np.conj(c[k])) > 1e-14 * max(1.0, abs(c[k])):
                raise ValueError(f"reality requires c_{-k} = conj(c_{k})")
        else:
            c[-k] = np.conj(c[k])

    xi = cfg.xi_grid
    h = np.zeros((2 * cfg.k_max + 1, cfg.n_xi), dtype=complex)
    for k, ck in c.items():
        if abs(k) > cfg.k_max:
            raise ValueError(f"mode {k} outside |k| <= {cfg.k_max}")
        h[k + cfg.k_max] = ck * phi(xi)

    if normalize:
        p = gevrey or GevreyParams()
        cur = _phase_space_norm(h, cfg, p.lambda0, p.gamma, p.sigma)
        if cur <= 0:
            raise ValueError("cannot normalize identically zero data")
        h *= cfg.epsilon ** 2 / cur
    return SpectralState(0.0, h)


def _phase_space_norm(h_hat, cfg: SimConfig, z, gamma, sigma) -> float:
    xi = cfg.xi_grid
    k = cfg.modes
    br = np.sqrt(1.0 + k[:, None] ** 2 + xi[None, :] ** 2)
    A2 = np.exp(2.0 * z * br ** gamma) * br ** (2.0 * sigma)
    dxi = xi[1] - xi[0]
    return float(np.sqrt(np.sum(A2 * np.abs(h_hat) ** 2) * dxi))


def density_modes(state_h: np.ndarray, tau: float, cfg: SimConfig,
                  strict: bool = True) -> np.ndarray:
    """rho_k(tau) = h^(tau, k, k tau) by cubic interpolation; rho_0 = 0.

    Indexed k + k_max.  Sampling points beyond the xi-window raise,
    unless ``strict`` is off (free-streaming reporting), where the decay
    of the data makes the value indistinguishable from zero.
    """
    xi = cfg.xi_grid
    K = cfg.k_max
    rho = np.zeros(2 * K + 1, dtype=complex)
    for k in range(-K, K + 1):
        if k == 0:
            continue
        pt = k * tau
        if abs(pt) > cfg.xi_max:
            if strict:
                raise ValueError(
                    f"density sample xi = {pt:g} outside window "
                    f"[-{cfg.xi_max:g}, {cfg.xi_max:g}]")
            continue
        spline = CubicSpline(xi, state_h[k + K])
        rho[k + K] = spline(pt)
    return rho


def rhs(state_h: np.ndarray, tau: float, cfg: SimConfig) -> np.ndarray:
    """Time derivative of h^ at renormalized time tau."""
    K = cfg.k_max
    out = np.zeros_like(state_h)
    if cfg.mode is SimMode.FREE_STREAMING:
        return out

    if not np.all(np.isfinite(state_h)):
        # a stage value already overflowed; report the blow-up time
        raise BlowUpError(tau)

    xi = cfg.xi_grid
    a = float(a_of_T(cfg.model, tau))
    sf = -cfg.sign.eps_F
    rho = density_modes(state_h, tau, cfg)

    if cfg.mode is SimMode.FULL_NONLINEAR:
        # E[m + K, l + K] = h^(m, xi - l tau), zero outside the window
        shifts = np.empty((2 * K + 1, 2 * K + 1, cfg.n_xi), dtype=complex)
        for m in range(-K, K + 1):
            spline = CubicSpline(xi, state_h[m + K], extrapolate=False)
            for l in range(-K, K + 1):
                vals = spline(xi - l * tau)
                shifts[m + K, l + K] = np.nan_to_num(vals, nan=0.0)

    for k in range(-K, K + 1):
        if k == 0:
            continue
        coef = xi - k * tau
        lin = -sf * 4.0 * np.pi * a * (coef / k) * rho[k + K] \
            * mu_hat(cfg.eq, coef)
        row = lin.astype(complex)
        if cfg.mode is SimMode.FULL_NONLINEAR:
            for l in range(-K, K + 1):
                if l == 0 or abs(k - l) > K:
                    continue
                row += sf * 4.0 * np.pi * a * (coef / l) * rho[l + K] \
                    * shifts[k - l + K, l + K]
        out[k + K] = row
    return out


def step(state: SpectralState, cfg: SimConfig) -> SpectralState:
    """Classical 4-stage explicit step by dtau; raises BlowUpError."""
    h, tau, dt = state.h_hat, state.tau, cfg.dtau
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = rhs(h, tau, cfg)
        k2 = rhs(h + dt / 2 * k1, tau + dt / 2, cfg)
        k3 = rhs(h + dt / 2 * k2, tau + dt / 2, cfg)
        k4 = rhs(h + dt * k3, tau + dt, cfg)
        new = h + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(new)):
        raise BlowUpError(tau + dt)
    return SpectralState(tau + dt, new)


@dataclass
class SimulationRecord:
    cfg: SimConfig
    taus: np.ndarray
    ts: np.ndarray
    rho: np.ndarray            # (n_out, 2 k_max + 1) complex
    F_tilde: np.ndarray
    G_tilde: np.ndarray
    diag_bootstrap: np.ndarray
    diag_embedding: np.ndarray
    phys_density_norm: np.ndarray
    leakage: np.ndarray        # max |h^| on the |k| = k_max rows
    snapshots: list = field(default_factory=list)

    def rho_abs(self, k: int) -> np.ndarray:
        return np.abs(self.rho[:, k + self.cfg.k_max])


def run_simulation(cfg: SimConfig, initial: SpectralState,
                   out_every: int = 10,
                   gevrey: Optional[GevreyParams] = None,
                   keep_snapshots: bool = True) -> SimulationRecord:
    """March the system to tau_end, recording diagnostics per stride.

    Emits per output step: tau, t = T(tau), all density modes, the
    sliding generator functions, the measured differential-inequality
    ratio, the embedding ratio F / sqrt(G), and the physical density
    norm a(t)^{-dim} * ||rho||_{Gevrey} at radius lambda1 / 2.
    """
    p = gevrey or GevreyParams()
    n_steps = int(round(cfg.tau_end / cfg.dtau))
    strict = cfg.mode is not SimMode.FREE_STREAMING

    taus, ts, rhos, Fs, Gs = [], [], [], [], []
    boots, embeds, phys, leaks = [], [], [], []
    snapshots = []
    prev = None  # (state copy, tau) at the previous output
    dz = 1e-3

    state = initial.copy()
    for istep in range(n_steps + 1):
        if istep % out_every == 0 or istep == n_steps:
            tau = state.tau
            z = float(sliding_z(p, tau))
            rho = density_modes(state.h_hat, tau, cfg, strict=strict)
            rho_map = {int(k): rho[k + cfg.k_max] for k in cfg.modes}
            F = generator_F(p, rho_map, tau, z)
            G = generator_G(p, state.h_hat, cfg.modes, cfg.xi_grid, z,
                            d=cfg.dim)
            Gp = generator_G(p, state.h_hat, cfg.modes, cfg.xi_grid,
                             min(z + dz, 1.0), d=cfg.dim)
            Gm = generator_G(p, state.h_hat, cfg.modes, cfg.xi_grid,
                             max(z - dz, 0.0), d=cfg.dim)
            dzG = (Gp - Gm) / (2 * dz)
            a = float(a_of_T(cfg.model, tau))
            if prev is not None:
                G_then = generator_G(p, prev[0], cfg.modes, cfg.xi_grid, z,
                                     d=cfg.dim)
                dtG = (G - G_then) / (tau - prev[1])
                denom = a * F * np.sqrt(G) + a * np.hypot(1.0, tau) * F * dzG
                boot = dtG / denom if denom > 0 else 0.0
            else:
                boot = 0.0
            t_cosmic = float(t_of_tau(cfg.model, tau))
            p_rep = GevreyParams(gamma=p.gamma, sigma=0.0, alpha=p.alpha,
                                 lambda0=p.lambda0, lambda1=p.lambda1,
                                 delta=p.delta, theta0=p.theta0)
            norm = gevrey_norm_torus(p_rep, rho_map, z=p.lambda1 / 2.0)

            taus.append(tau)
            ts.append(t_cosmic)
            rhos.append(rho)
            Fs.append(F)
            Gs.append(G)
            boots.append(boot)
            embeds.append(F / np.sqrt(G) if G > 0 else 0.0)
            phys.append(a ** (-cfg.dim) * norm)
            leaks.append(float(max(np.max(np.abs(state.h_hat[0])),
                                   np.max(np.abs(state.h_hat[-1])))))
            if keep_snapshots:
                snapshots.append(state.copy())
            prev = (state.h_hat.copy(), tau)
        if istep < n_steps:
            state = step(state, cfg)

    return SimulationRecord(
        cfg=cfg,
        taus=np.array(taus), ts=np.array(ts), rho=np.array(rhos),
        F_tilde=np.array(Fs), G_tilde=np.array(Gs),
        diag_bootstrap=np.array(boots), diag_embedding=np.array(embeds),
        phys_density_norm=np.array(phys), leakage=np.array(leaks),
        snapshots=snapshots,
    )


def h_infinity_report(snapshots: list, cfg: SimConfig,
                      lambda_prime: float, gamma: float = 1.0):
    """Gevrey-lambda' distances of each stored state to the final one.

    Returns an array of (tau, distance) rows; the final snapshot acts as
    the h_infinity proxy.
    """
    if len(snapshots) < 3:
        raise ValueError("need at least 3 snapshots")
    final = snapshots[-1].h_hat
    rows = []
    for st in snapshots:
        d = _phase_space_norm(st.h_hat - final, cfg, lambda_prime, gamma, 0.0)
        rows.append((st.tau, d))
    return np.array(rows)
