import numpy as np
import pytest

from expanding_landau import (ATTRACTIVE, REPULSIVE, Equilibrium,
                              ResolventTable, ScaleFactorModel, TauGrid,
                              apply_resolvent, check_resolvent_bound,
                              closed_form_resolvent_q0, comparison_bound,
                              kernel_K, resolvent_column, resolvent_table,
                              resolvent_via_ode, solve_volterra)

EQ = Equilibrium.poisson(theta0=1.0)
M0 = ScaleFactorModel.constant()


def q0_kernel(sign=REPULSIVE, k=1.0):
    return lambda tau, tt: kernel_K(EQ, M0, sign, k, tau, tt)


def oracle_table(grid: TauGrid) -> ResolventTable:
    t = grid.nodes
    vals = np.zeros((len(t), len(t)))
    i, j = np.tril_indices(len(t), k=-1)
    vals[i, j] = closed_form_resolvent_q0(1.0, 1.0, t[i] - t[j])
    return ResolventTable(k=1.0, grid=grid, values=vals)


def test_solve_zero_kernel():
    grid = TauGrid(2.0, 100)
    src = lambda tau: np.cos(np.asarray(tau))
    phi = solve_volterra(lambda a, b: np.zeros_like(np.asarray(b)), src, grid)
    assert np.allclose(phi, np.cos(grid.nodes), atol=1e-14)


def test_solve_constant_kernel_exponential():
    grid = TauGrid(1.0, 2000)
    kern = lambda tau, tt: np.ones_like(np.asarray(tt, dtype=float))
    phi = solve_volterra(kern, lambda tau: np.ones_like(np.asarray(tau)), grid)
    assert phi[-1] == pytest.approx(np.e, abs=5e-7)  # O(dtau^2)


def test_solve_vs_resolvent_representation():
    # phi from marching equals s + int R s with the closed-form resolvent
    grid = TauGrid(2.0, 2000)
    src = lambda tau: np.exp(-np.asarray(tau) ** 2)
    phi = solve_volterra(q0_kernel(), src, grid)
    phi2 = apply_resolvent(oracle_table(grid), src(grid.nodes))
    assert np.max(np.abs(phi - phi2)) <= 1e-4


def test_resolvent_table_zero_kernel():
    grid = TauGrid(1.0, 50)
    tab = resolvent_table(lambda a, b: np.zeros_like(np.asarray(b)), grid)
    assert np.all(tab.values == 0)


def test_resolvent_table_q0_oracle():
    grid = TauGrid(2.0, 2000)
    tab = resolvent_table(q0_kernel(), grid)
    t = grid.nodes
    i, j = np.tril_indices(len(t), k=-1)
    err = np.abs(tab.values[i, j]
                 - closed_form_resolvent_q0(1.0, 1.0, t[i] - t[j]))
    assert np.max(err) <= 1e-4
    assert np.all(np.diag(tab.values) == 0)


def test_resolvent_column_matches_table():
    grid = TauGrid(5.0, 500)
    tab = resolvent_table(q0_kernel(), grid)
    for j in [0, 100, 333]:
        col = resolvent_column(q0_kernel(), grid, j)
        assert np.allclose(col, tab.values[:, j], atol=1e-12)


def test_closed_form_values():
    assert closed_form_resolvent_q0(1.0, 1.0, 0.0) == 0.0
    s = np.sqrt(np.pi) / 4.0  # 2 sqrt(pi) s = pi/2
    want = -2.0 * np.sqrt(np.pi) * np.exp(-s)
    assert closed_form_resolvent_q0(1.0, 1.0, s) == pytest.approx(want,
                                                                  rel=1e-14)
    ss = np.linspace(0, 10, 500)
    vals = closed_form_resolvent_q0(1.0, 1.0, ss)
    assert np.all(np.abs(vals) <= 2.0 * np.sqrt(np.pi) * np.exp(-ss) + 1e-14)


def test_ode_route_q0_oracle():
    grid = TauGrid(10.0, 2000)
    col = resolvent_via_ode(EQ, M0, 1.0, 0.0, grid)
    oracle = closed_form_resolvent_q0(1.0, 1.0, grid.nodes)
    assert np.max(np.abs(col - oracle)) <= 1e-6
    # zero initial data: R = K at tau = tau_tilde, both zero
    assert col[0] == 0.0


def test_ode_route_nonzero_tau_tilde():
    grid = TauGrid(10.0, 1000)
    j = 300
    col = resolvent_via_ode(EQ, M0, 1.0, grid.nodes[j], grid)
    oracle = np.where(grid.nodes >= grid.nodes[j],
                      closed_form_resolvent_q0(
                          1.0, 1.0, np.maximum(grid.nodes - grid.nodes[j], 0)),
                      0.0)
    assert np.max(np.abs(col - oracle)) <= 1e-5


def test_ode_route_power_law_vs_table():
    m = ScaleFactorModel.power_law(q=0.25, t0=1.0)
    kern = lambda tau, tt: kernel_K(EQ, m, REPULSIVE, 1.0, tau, tt)
    grid = TauGrid(10.0, 1000)
    tab = resolvent_table(kern, grid)
    col = resolvent_via_ode(EQ, m, 1.0, 0.0, grid)
    scale = max(np.max(np.abs(tab.values[:, 0])), 1e-8)
    assert np.max(np.abs(col - tab.values[:, 0])) / scale <= 1e-3


def test_ode_route_rejects_maxwellian():
    with pytest.raises(ValueError):
        resolvent_via_ode(Equilibrium.maxwellian(1.0, 1.0), M0, 1.0, 0.0,
                          TauGrid(1.0, 10))


def test_apply_resolvent_trivial():
    grid = TauGrid(1.0, 100)
    zero_tab = ResolventTable(1.0, grid, np.zeros((101, 101)))
    s = np.sin(grid.nodes)
    assert np.allclose(apply_resolvent(zero_tab, s), s)
    assert np.allclose(apply_resolvent(oracle_table(grid),
                                       np.zeros(101)), 0.0)
    with pytest.raises(ValueError):
        apply_resolvent(zero_tab, np.zeros(7))


def test_convergence_order():
    # halving the step shrinks the oracle error about 4x (second order)
    errs = []
    for n in [500, 1000]:
        grid = TauGrid(5.0, n)
        col = resolvent_column(q0_kernel(), grid, 0)
        errs.append(np.max(np.abs(
            col - closed_form_resolvent_q0(1.0, 1.0, grid.nodes))))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_resolvent_bound_q0_constant():
    # |R| ~ 4 pi s near the diagonal, so C = sup 2 sqrt(pi)|sin(2 sqrt(pi) s)|
    # /(s+s^2) = 4 pi as s -> 0
    grid = TauGrid(10.0, 1000)
    tab = resolvent_table(q0_kernel(), grid)
    C = check_resolvent_bound(tab, M0, 1.0, 1.0)
    assert C == pytest.approx(4.0 * np.pi, rel=0.02)
    C2 = check_resolvent_bound(tab, M0, 1.0, 1.0, envelope="s2")
    assert C2 > C  # literal s^2 weight blows up near the diagonal


@pytest.mark.parametrize("q", [0.25, 0.4])
def test_resolvent_bound_power_law_stable(q):
    m = ScaleFactorModel.power_law(q=q, t0=1.0)
    kern = lambda tau, tt: kernel_K(EQ, m, REPULSIVE, 1.0, tau, tt)
    c = []
    for n in [400, 800]:
        tab = resolvent_table(kern, TauGrid(10.0, n))
        c.append(check_resolvent_bound(tab, m, 1.0, 1.0))
    assert np.isfinite(c[1])
    assert abs(c[1] - c[0]) / c[1] <= 0.10


def test_comparison_bound_trivial_and_exponential():
    grid = TauGrid(1.0, 1000)
    y = lambda tau: np.cos(np.asarray(tau)) ** 2
    out = comparison_bound(lambda a, b: np.zeros_like(np.asarray(b)), y, grid,
                           check_resolvent=False)
    assert np.allclose(out, y(grid.nodes))
    ones_k = lambda a, b: np.ones_like(np.asarray(b, dtype=float))
    out2 = comparison_bound(ones_k, lambda tau: np.ones_like(np.asarray(tau)),
                            grid, check_resolvent=False)
    assert np.max(np.abs(out2 - np.exp(grid.nodes))) < 5e-6


def test_comparison_property():
    # any sub-solution (built from a smaller source) stays below the majorant
    grid = TauGrid(2.0, 400)
    kern = lambda a, b: 0.5 * np.exp(-(a - np.asarray(b)))
    y = lambda tau: 1.0 + 0.5 * np.sin(np.asarray(tau))
    major = comparison_bound(kern, y, grid)
    rng = np.random.default_rng(3)
    for _ in range(5):
        c = rng.uniform(0.1, 1.0)
        sub = solve_volterra(kern, lambda tau: c * y(tau), grid)
        assert np.all(sub <= major + 1e-8)
    with pytest.raises(ValueError):
        comparison_bound(kern, lambda tau: -np.ones_like(np.asarray(tau)),
                         grid)


def test_gravitational_growth_rate():
    # attractive q=0: R(s) = 2 sqrt(pi) e^{-s} sinh(2 sqrt(pi) s), growing
    # like e^{(2 sqrt(pi)-1) s}
    grid = TauGrid(15.0, 3000)
    col = resolvent_column(q0_kernel(sign=ATTRACTIVE), grid, 0)
    s = grid.nodes
    mask = (s >= 5.0) & (s <= 15.0)
    slope = np.polyfit(s[mask], np.log(np.abs(col[mask])), 1)[0]
    want = 2.0 * np.sqrt(np.pi) - 1.0
    assert slope == pytest.approx(want, rel=0.02)


@pytest.mark.parametrize("q", [0.0, 0.25])
def test_linear_damping_transfer(q):
    # sup_s |R(tau~+s, tau~)| e^{theta1 s} <tau~>^{-beta'} stays uniformly
    # bounded in tau~ for theta1 = theta0/4, beta' = (3/2) q/(1-2q)
    m = ScaleFactorModel.power_law(q=q, t0=1.0)
    kern = lambda tau, tt: kernel_K(EQ, m, REPULSIVE, 1.0, tau, tt)
    grid = TauGrid(10.0, 800)
    tab = resolvent_table(kern, grid)
    theta1 = 0.25
    bp = 1.5 * q / (1.0 - 2.0 * q)
    t = grid.nodes
    vals = []
    for j in range(0, grid.n, 40):
        s = t[j + 1:] - t[j]
        col = np.abs(tab.values[j + 1:, j])
        v = np.max(col * np.exp(theta1 * s)) * (1.0 + t[j] ** 2) ** (-bp / 2)
        vals.append(v)
    vals = np.array(vals)
    # late columns must not exceed a grid-stable multiple of early ones
    assert np.max(vals[len(vals) // 2:]) <= 2.0 * np.max(vals[:len(vals) // 2])
