"""Volterra equations of the second kind and their resolvent kernels.

phi(tau) = s(tau) + int_0^tau K(tau, t~) phi(t~) dt~ is marched forward
with product-trapezoidal quadrature (second order; the physical kernels
vanish on the diagonal, so the implicit diagonal weight is harmless).
The resolvent R(tau, t~) is computed two independent ways: column-wise
by the same marching recursion, and - for the Poisson family - through
the auxiliary oscillator

    u'' + 4 pi a(T(tau)) u = -16 pi^2 a(T(tau)) a(T(t~)) (tau - t~),
    u(t~) = u'(t~) = 0,
    R(tau, t~) = K(tau, t~) - exp(-theta0 |k| (tau - t~)) u(tau).

(The sign of the forcing follows from u'' = 4 pi a [exp(theta0|k|s) K - u]
with K = -4 pi s exp(-theta0|k|s) a(T(t~)); the q = 0 closed form below
confirms it.)  For a constant scale factor the kernel is convolution-type
and the Fourier-Laplace transform gives the exact resolvent

    R(s) = -2 sqrt(pi) exp(-theta0 |k| s) sin(2 sqrt(pi) s),

from R^ = K^/(1 - K^) with K^(lambda) = -4 pi (lambda + theta0|k|)^{-2}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cosmology import ScaleFactorModel, a_of_T
from .equilibrium import Equilibrium, EquilibriumKind


@dataclass(frozen=True)
class TauGrid:
    tau_max: float
    n: int
    step: float = field(init=False)
    nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.tau_max <= 0 or self.n < 1:
            raise ValueError("need tau_max > 0 and n >= 1")
        object.__setattr__(self, "step", self.tau_max / self.n)
        object.__setattr__(self, "nodes",
                           np.linspace(0.0, self.tau_max, self.n + 1))


@dataclass
class ResolventTable:
    k: float
    grid: TauGrid
    values: np.ndarray  # lower-triangular, R[i, j] ~ R_k(tau_i, tau_j)

    def __post_init__(self):
        n = self.grid.n + 1
        if self.values.shape != (n, n):
            raise ValueError("values shape must match the grid")
        if np.max(np.abs(np.diag(self.values))) > 0:
            raise ValueError("diagonal of the resolvent table must vanish")
        if np.max(np.abs(np.triu(self.values, 1))) > 0:
            raise ValueError("resolvent table must be lower-triangular")


def _march(kernel, source_vals, grid: TauGrid):
    """Forward product-trapezoidal marching for one Volterra solution."""
    t = grid.nodes
    dt = grid.step
    n = grid.n + 1
    phi = np.zeros(n, dtype=np.result_type(source_vals.dtype, float))
    phi[0] = source_vals[0]
    for i in range(1, n):
        row = np.asarray(kernel(t[i], t[: i + 1]), dtype=float)
        diag = 1.0 - 0.5 * dt * row[i]
        if abs(diag) < 1e-12:
            raise ZeroDivisionError(
                f"singular marching step at tau = {t[i]:g}")
        acc = 0.5 * row[0] * phi[0] + row[1:i] @ phi[1:i]
        phi[i] = (source_vals[i] + dt * acc) / diag
    return phi


def solve_volterra(kernel, source, grid: TauGrid):
    """Solve phi = s + int_0^tau K phi by forward marching.

    ``kernel(tau, tau_tilde)`` must accept an array of tau_tilde;
    ``source(tau)`` must accept an array of tau.  Complex sources are
    solved component-wise (the kernel is real).
    """
    s = np.asarray(source(grid.nodes))
    if np.iscomplexobj(s):
        return _march(kernel, s.real, grid) + 1j * _march(kernel, s.imag, grid)
    return _march(kernel, s.astype(float), grid)


def resolvent_column(kernel, grid: TauGrid, j: int):
    """One column R(., tau_j) of the resolvent table.

    Marches R(tau_i, tau_j) in i from the integral equation
    R = K + int_{tau_j}^{tau} K(tau, s) R(s, tau_j) ds with the same
    product-trapezoidal rule as ``solve_volterra``.
    """
    t = grid.nodes
    dt = grid.step
    n = grid.n + 1
    col = np.zeros(n)
    for i in range(j + 1, n):
        row = np.asarray(kernel(t[i], t[j: i + 1]), dtype=float)
        diag = 1.0 - 0.5 * dt * row[-1]
        if abs(diag) < 1e-12:
            raise ZeroDivisionError(
                f"singular marching step at tau = {t[i]:g}")
        # half-weight left endpoint multiplies R[j, j] = 0
        acc = row[1:-1] @ col[j + 1: i]
        col[i] = (row[0] + dt * acc) / diag
    return col


def resolvent_table(kernel, grid: TauGrid, k: float = 1.0) -> ResolventTable:
    """Full lower-triangular resolvent grid; O(n^3), columns independent.

    All columns are marched simultaneously in i, so the inner work is a
    BLAS matrix-vector product per row.
    """
    t = grid.nodes
    dt = grid.step
    n = grid.n + 1
    R = np.zeros((n, n))
    for i in range(1, n):
        row = np.asarray(kernel(t[i], t[:i]), dtype=float)
        diag_k = float(kernel(t[i], np.asarray([t[i]]))[0])
        diag = 1.0 - 0.5 * dt * diag_k
        if abs(diag) < 1e-12:
            raise ZeroDivisionError(
                f"singular marching step at tau = {t[i]:g}")
        # R[m, j] = 0 for m <= j, so the full dot realizes the
        # trapezoid over (tau_j, tau_i) with interior weight 1
        R[i, :i] = (row + dt * (row @ R[:i, :i])) / diag
    return ResolventTable(k=k, grid=grid, values=R)


def closed_form_resolvent_q0(theta0: float, k_abs: float, s):
    """Exact resolvent for the repulsive Poisson kernel with a == 1."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("lag s must be >= 0")
    c = 2.0 * np.sqrt(np.pi)
    out = -c * np.exp(-theta0 * k_abs * s) * np.sin(c * s)
    return out if out.ndim else float(out)


def resolvent_via_ode(eq: Equilibrium, model: ScaleFactorModel, k,
                      tau_tilde: float, grid: TauGrid):
    """Resolvent column through the auxiliary oscillator (Poisson only).

    Classical fixed-step RK4 with step grid.step / 4, then
    R(tau, t~) = K(tau, t~) - exp(-theta0|k|(tau - t~)) u(tau).
    """
    if eq.kind is not EquilibriumKind.POISSON_FAMILY:
        raise ValueError("ODE route requires the Poisson family")
    kabs = float(np.linalg.norm(np.atleast_1d(np.asarray(k, dtype=float))))
    th = eq.theta0 * kabs
    a_tt = float(a_of_T(model, tau_tilde))

    def deriv(tau, y):
        a = float(a_of_T(model, tau))
        force = -16.0 * np.pi ** 2 * a * a_tt * (tau - tau_tilde)
        return np.array([y[1], force - 4.0 * np.pi * a * y[0]])

    t = grid.nodes
    n = grid.n + 1
    col = np.zeros(n)
    j0 = int(np.searchsorted(t, tau_tilde))
    y = np.zeros(2)
    h = grid.step / 4.0
    tau = tau_tilde
    for i in range(j0, n):
        # advance to the next node in quarter-steps
        while tau < t[i] - 1e-13:
            step = min(h, t[i] - tau)
            k1 = deriv(tau, y)
            k2 = deriv(tau + step / 2, y + step / 2 * k1)
            k3 = deriv(tau + step / 2, y + step / 2 * k2)
            k4 = deriv(tau + step, y + step * k3)
            y = y + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            tau += step
        s = t[i] - tau_tilde
        if s <= 0:
            col[i] = 0.0
            continue
        K = -4.0 * np.pi * s * np.exp(-th * s) * a_tt
        col[i] = K - np.exp(-th * s) * y[0]
    return col


def apply_resolvent(table: ResolventTable, source):
    """phi = s + int_0^tau R(tau, .) s by trapezoidal evaluation."""
    s = np.asarray(source)
    n = table.grid.n + 1
    if s.shape != (n,):
        raise ValueError("source must be sampled on the table grid")
    w = np.ones(n)
    w[0] = 0.5
    # the running right endpoint is the zero diagonal, so no correction
    phi = s + table.grid.step * (table.values @ (w * s))
    return phi


def check_resolvent_bound(table: ResolventTable, model: ScaleFactorModel,
                          theta0: float, k_abs: float,
                          envelope: str = "s+s2") -> float:
    """Fitted constant of |R| against the decay envelope.

    envelope "s+s2": (s + s^2) exp(-theta0|k| s) a(T(t~)) a(T(tau))^{1/2};
    "s2" uses the literal s^2 weight, which blows up near the diagonal
    where |R| ~ 4 pi s (both are reported so the reading stays explicit).
    """
    t = table.grid.nodes
    aT = a_of_T(model, t)
    i, j = np.tril_indices(len(t), k=-1)
    s = t[i] - t[j]
    if envelope == "s+s2":
        weight = s + s ** 2
    elif envelope == "s2":
        weight = s ** 2
    else:
        raise ValueError(f"unknown envelope {envelope!r}")
    env = weight * np.exp(-theta0 * k_abs * s) * aT[j] * np.sqrt(aT[i])
    return float(np.max(np.abs(table.values[i, j]) / env))


def comparison_bound(kernel_abs, source_abs, grid: TauGrid,
                     check_resolvent: bool = True):
    """Majorant solution of u~ = y + int K u~ for nonnegative data.

    Any continuous u with u <= y + int K u is bounded by the returned
    majorant; with ``check_resolvent`` the entrywise nonnegativity of the
    resolvent of the nonnegative kernel is verified (O(n^3)).
    """
    y = np.asarray(source_abs(grid.nodes), dtype=float)
    probe = np.asarray(kernel_abs(grid.tau_max,
                                  grid.nodes), dtype=float)
    if np.any(y < 0) or np.any(probe < 0):
        raise ValueError("comparison bound requires nonnegative data")
    if check_resolvent:
        tab = resolvent_table(kernel_abs, grid)
        if np.min(tab.values) < -1e-10 * max(1.0, np.max(np.abs(tab.values))):
            raise AssertionError("resolvent of a nonnegative kernel "
                                 "must be nonnegative")
    return _march(kernel_abs, y, grid)
