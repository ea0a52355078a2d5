"""Scale-factor models and the renormalized-time transform.

The expansion law a(t) enters the kinetic analysis only through the
renormalized clock tau(t) = int_{t0}^t a(s)^{-2} ds and the composed
factor a(T(tau)), where T is the inverse of tau.  Power laws a(t) = t^q
admit closed forms for both, which this module implements together with
the admissibility checks (polynomial growth of a o T and integrability
of the Liouville-Green variation integrand) that the damping estimates
require.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import quad


class ScaleFactorKind(Enum):
    POWER_LAW = "power_law"
    CONSTANT = "constant"


@dataclass(frozen=True)
class ScaleFactorModel:
    """Expansion law a(t) on [t0, oo).

    For the power law a(t) = t^q, only q in [0, 1/2] is admitted by
    default: for q > 1/2 the renormalized time has finite range, so
    particles travel only a finite comoving distance and full phase
    mixing is impossible.  The cosmic-time operations ``background_field``
    and ``friedman_residual`` are still meaningful for q > 1/2; pass
    ``allow_finite_range=True`` to build such a model (the tau-transform
    operations then reject it).
    """

    kind: ScaleFactorKind
    q: float = 0.0
    t0: float = 1.0
    allow_finite_range: bool = False

    def __post_init__(self):
        if self.t0 <= 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if self.kind is ScaleFactorKind.POWER_LAW:
            if self.q < 0:
                raise ValueError(f"power-law exponent must be >= 0, got {self.q}")
            if self.q > 0.5 and not self.allow_finite_range:
                raise ValueError(
                    f"q = {self.q} > 1/2 gives tau(t) finite range; "
                    "full phase mixing impossible"
                )

    @classmethod
    def power_law(cls, q: float, t0: float = 1.0, *, allow_finite_range: bool = False):
        return cls(ScaleFactorKind.POWER_LAW, q=q, t0=t0,
                   allow_finite_range=allow_finite_range)

    @classmethod
    def constant(cls, t0: float = 1.0):
        return cls(ScaleFactorKind.CONSTANT, t0=t0)

    def a(self, t):
        """a(t) in cosmic time."""
        t = np.asarray(t, dtype=float)
        if self.kind is ScaleFactorKind.CONSTANT:
            return np.ones_like(t)
        return t ** self.q

    @property
    def beta_closed_form(self) -> float:
        """Growth exponent of a o T: q/(1-2q) for power laws, 0 otherwise."""
        if self.kind is ScaleFactorKind.POWER_LAW and self.q < 0.5:
            return self.q / (1.0 - 2.0 * self.q)
        if self.kind is ScaleFactorKind.CONSTANT or self.q == 0.0:
            return 0.0
        raise ValueError("a o T grows faster than any power for q >= 1/2")

    def _reject_finite_range(self):
        if self.kind is ScaleFactorKind.POWER_LAW and self.q > 0.5:
            raise ValueError("tau-transform unsupported for q > 1/2 (finite range)")


@dataclass(frozen=True)
class AdmissibilityReport:
    beta_fit: float
    scale_bound_ok: bool
    lg_integral: float
    lg_integral_finite: bool
    beta_closed_form: float = 0.0
    beta_rel_gap: float = 0.0

    def __post_init__(self):
        if self.lg_integral < 0:
            raise ValueError("lg_integral must be nonnegative")
        if self.beta_fit < -1e-12:
            raise ValueError("beta_fit must be nonnegative")


def tau_of_t(model: ScaleFactorModel, t):
    """Renormalized time tau(t) = int_{t0}^t a(s)^{-2} ds (closed form)."""
    model._reject_finite_range()
    t = np.asarray(t, dtype=float)
    if np.any(t < model.t0):
        raise ValueError(f"t must be >= t0 = {model.t0}")
    if model.kind is ScaleFactorKind.CONSTANT:
        out = t - model.t0
    elif model.q == 0.5:
        out = np.log(t) - np.log(model.t0)
    else:
        p = 1.0 - 2.0 * model.q
        out = (t ** p - model.t0 ** p) / p
    return out if out.ndim else float(out)


def t_of_tau(model: ScaleFactorModel, tau):
    """Inverse transform T(tau), i.e. cosmic time as a function of tau."""
    model._reject_finite_range()
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    if model.kind is ScaleFactorKind.CONSTANT:
        out = model.t0 + tau
    elif model.q == 0.5:
        out = model.t0 * np.exp(tau)
    else:
        p = 1.0 - 2.0 * model.q
        out = (p * tau + model.t0 ** p) ** (1.0 / p)
    return out if out.ndim else float(out)


def a_of_T(model: ScaleFactorModel, tau):
    """Composed scale factor a(T(tau)).

    Power law, q < 1/2: ((1-2q) tau + t0^{1-2q})^{q/(1-2q)};
    q = 1/2: sqrt(t0) exp(tau/2); constant: 1.
    """
    model._reject_finite_range()
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    if model.kind is ScaleFactorKind.CONSTANT:
        out = np.ones_like(tau)
    elif model.q == 0.5:
        out = np.sqrt(model.t0) * np.exp(tau / 2.0)
    else:
        p = 1.0 - 2.0 * model.q
        out = (p * tau + model.t0 ** p) ** (model.q / p)
    return out if out.ndim else float(out)


def _lg_integrand(model: ScaleFactorModel, tau):
    """Admissibility integrand for power laws, in the standard closed form

        (q/4) (1 - 7q/4) ((1-2q) tau + t0^{1-2q})^{q/(2(1-2q)) - 2}.

    Integrability of this power (exponent < -1 for q < 1/2) is what the
    damping estimates need; the Liouville-Green module computes the
    variation budget itself directly from a^{-1/4} derivatives.
    """
    if model.kind is ScaleFactorKind.CONSTANT or model.q == 0.0:
        return np.zeros_like(np.asarray(tau, dtype=float))
    q, t0 = model.q, model.t0
    if q >= 0.5:
        raise ValueError("LG integrand closed form requires q < 1/2")
    p = 1.0 - 2.0 * q
    u = p * np.asarray(tau, dtype=float) + t0 ** p
    coeff = abs(q / 4.0 * (1.0 - 1.75 * q))
    return coeff * u ** (q / (2.0 * p) - 2.0)


def check_admissibility(model: ScaleFactorModel, tau_max: float,
                        n_grid: int = 256) -> AdmissibilityReport:
    """Fit the growth exponent of a o T and evaluate the LG variation integral.

    beta is fitted by log-log regression of a(T(tau)) against <tau> on a
    logarithmic grid; the improper integral is computed by adaptive
    quadrature on [0, tau_max] plus a power-law tail extrapolation, which
    is exact for power-law models.
    """
    if tau_max <= 0:
        raise ValueError("tau_max must be positive")
    if n_grid < 16:
        raise ValueError("n_grid must be >= 16")

    grid = np.logspace(0.0, np.log10(1.0 + tau_max), n_grid) - 1.0 + 1e-9
    grid = np.clip(grid, 0.0, tau_max)
    aT = a_of_T(model, grid)
    bracket = np.sqrt(1.0 + grid ** 2)

    loga = np.log(aT)
    logb = np.log(bracket)
    # the growth exponent is asymptotic; fit on the tail of the grid
    # where the power-law regime dominates the t0 offset
    tail = grid >= tau_max / 20.0
    if np.count_nonzero(tail) < 8:
        tail = np.ones_like(grid, dtype=bool)
    if np.ptp(logb[tail]) < 1e-12 or np.ptp(loga[tail]) < 1e-14:
        beta_fit = 0.0
    else:
        beta_fit = max(float(np.polyfit(logb[tail], loga[tail], 1)[0]), 0.0)

    ratio = aT / bracket ** beta_fit
    scale_bound_ok = bool(np.max(ratio) <= 10.0 * np.median(ratio))

    if model.kind is ScaleFactorKind.CONSTANT or model.q == 0.0:
        lg_integral = 0.0
    else:
        lg_integral, _ = quad(lambda x: _lg_integrand(model, x), 0.0, tau_max,
                              limit=200)
        # power-law tail: integrand ~ C u^p with u = (1-2q) tau + t0^{1-2q}
        g_end = float(_lg_integrand(model, tau_max))
        g_mid = float(_lg_integrand(model, 2.0 * tau_max))
        if g_end > 0 and g_mid > 0:
            p = 1.0 - 2.0 * model.q
            u1 = p * tau_max + model.t0 ** p
            u2 = p * 2.0 * tau_max + model.t0 ** p
            slope = np.log(g_mid / g_end) / np.log(u2 / u1)
            if slope < -1.0:
                lg_integral += -g_end * u1 / ((slope + 1.0) * p)
    lg_integral = float(lg_integral)

    beta_cf = model.beta_closed_form
    gap = abs(beta_fit - beta_cf) / max(abs(beta_cf), 1e-12) if beta_cf else beta_fit
    return AdmissibilityReport(
        beta_fit=beta_fit,
        scale_bound_ok=scale_bound_ok,
        lg_integral=lg_integral,
        lg_integral_finite=np.isfinite(lg_integral),
        beta_closed_form=beta_cf,
        beta_rel_gap=float(gap),
    )


def background_field(model: ScaleFactorModel, d: int, eps_F: int, t):
    """External field coefficient phi_b(t) sustaining power-law expansion.

    phi_b(t) = -eps_F (4 pi / d) a^{2-d} - q(q-1) a^{2 - 2/q}, a = t^q.
    The second exponent makes a(t) = t^q solve the Friedman-like relation
    exactly (phi_b = -a*adot' - eps_F (4 pi/d) a^{2-d} with
    a * addot = q(q-1) t^{2q-2} = q(q-1) a^{2-2/q}).
    """
    if model.kind is not ScaleFactorKind.POWER_LAW or model.q <= 0:
        raise ValueError("background_field requires a power law with q > 0")
    t = np.asarray(t, dtype=float)
    if np.any(t < model.t0):
        raise ValueError("t must be >= t0")
    q = model.q
    a = t ** q
    out = -eps_F * (4.0 * np.pi / d) * a ** (2.0 - d) \
        - q * (q - 1.0) * a ** (2.0 - 2.0 / q)
    return out if out.ndim else float(out)


def friedman_residual(model: ScaleFactorModel, d: int, eps_F: int, t_grid) -> float:
    """Max residual of addot = -(4 pi/d) eps_F a^{1-d} - a^{-1} phi_b on the grid."""
    t = np.asarray(t_grid, dtype=float)
    q = model.q
    addot = q * (q - 1.0) * t ** (q - 2.0)
    a = t ** q
    phi = background_field(model, d, eps_F, t)
    res = addot + (4.0 * np.pi / d) * eps_F * a ** (1.0 - d) + phi / a
    return float(np.max(np.abs(res)))
