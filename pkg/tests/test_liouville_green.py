import numpy as np
import pytest

from expanding_landau import (LGBasis, ScaleFactorModel, a_of_T,
                              inhomogeneous_vp, lg_error_budget,
                              lg_fundamental, reference_ivp,
                              reference_ivp_pair, wronskian_defect)


def const_basis(c=1.0, hi=25.0):
    return LGBasis(lambda x: c, (0.0, hi))


def power_basis(hi=40.0):
    m = ScaleFactorModel.power_law(q=0.25, t0=1.0)
    return LGBasis(lambda x: 4.0 * np.pi * float(a_of_T(m, x)), (0.0, hi)), m


def test_lg_fundamental_constant():
    w1, w2 = lg_fundamental(const_basis(), np.pi / 2)
    assert w1 == pytest.approx(1.0, abs=1e-10)
    assert w2 == pytest.approx(0.0, abs=1e-10)
    omega2 = 4.0
    b = const_basis(omega2)
    x = 0.7
    w1, w2 = lg_fundamental(b, x)
    assert w1 == pytest.approx(np.sin(2 * x) / np.sqrt(2.0), rel=1e-9)
    assert w2 == pytest.approx(np.cos(2 * x) / np.sqrt(2.0), rel=1e-9)
    with pytest.raises(ValueError):
        lg_fundamental(b, 30.0)


def test_error_budget_constant_zero():
    V, bound = lg_error_budget(const_basis(), 20.0)
    assert V == pytest.approx(0.0, abs=1e-12)
    assert bound == pytest.approx(0.0, abs=1e-12)


def test_error_budget_power_law():
    # q=1/4 composed factor (tau/2+1)^{1/2}: the variation integrand is
    # (9/256)(tau/2+1)^{-9/4}, total 9/160; rescaling a -> 4 pi a
    # multiplies it by (4 pi)^{-1/2}
    m = ScaleFactorModel.power_law(q=0.25, t0=1.0)
    raw = LGBasis(lambda x: float(a_of_T(m, x)), (0.0, 4.0e4))
    V, bound = lg_error_budget(raw, 4.0e4)
    assert V == pytest.approx(9.0 / 160.0, abs=1e-5)  # truncated tail
    assert bound == pytest.approx(np.expm1(V), rel=1e-12)
    resc, _ = power_basis(hi=4.0e4)
    V2, _ = lg_error_budget(resc, 4.0e4)
    assert V2 == pytest.approx(V / np.sqrt(4.0 * np.pi), rel=1e-3)
    V0, _ = lg_error_budget(raw, 1e-6)
    assert V0 < 1e-7  # integrand is bounded, so V vanishes linearly


def test_reference_ivp_closed_forms():
    grid = np.linspace(0.0, 20.0, 401)
    u = reference_ivp(const_basis(), lambda x: 0.0, 0.0, (0.0, 1.0), grid)
    assert np.max(np.abs(u - np.sin(grid))) < 1e-9
    grid_pi = np.linspace(0.0, np.pi, 101)
    u2 = reference_ivp(const_basis(), lambda x: 1.0, 0.0, (0.0, 0.0), grid_pi)
    assert np.max(np.abs(u2 - (1.0 - np.cos(grid_pi)))) < 1e-9
    assert u2[-1] == pytest.approx(2.0, abs=1e-9)
    grid4 = np.linspace(0.0, np.pi / 4, 51)
    u3 = reference_ivp(const_basis(4.0, np.pi), lambda x: 0.0, 0.0,
                       (1.0, 0.0), grid4)
    assert u3[-1] == pytest.approx(np.cos(np.pi / 2), abs=1e-9)


def test_reference_ivp_order():
    # RK45 at tight tolerance: error floor well below closed-form check
    grid = np.linspace(0.0, np.pi, 64)
    u = reference_ivp(const_basis(hi=np.pi), lambda x: 0.0, 0.0, (0.0, 1.0),
                      grid)
    assert abs(u[-1]) < 1e-9  # sin(pi)


def test_wronskian_exact_pairs():
    grid = np.linspace(0.1, 10.0, 40)
    b = const_basis(hi=12.0)
    d = wronskian_defect(b, np.sin, np.cos, grid,
                         dw1=np.cos, dw2=lambda x: -np.sin(x))
    assert d <= 1e-12
    om = 3.0
    b2 = const_basis(om ** 2, hi=12.0)
    d2 = wronskian_defect(
        b2, lambda x: np.sin(om * x) / np.sqrt(om),
        lambda x: np.cos(om * x) / np.sqrt(om), grid,
        dw1=lambda x: np.sqrt(om) * np.cos(om * x),
        dw2=lambda x: -np.sqrt(om) * np.sin(om * x))
    assert d2 <= 1e-10


def test_wronskian_reference_pair_power_law():
    basis, _ = power_basis(hi=20.0)
    grid = np.linspace(0.0, 20.0, 201)
    a0 = basis.a_func(0.0)
    w1, dw1 = reference_ivp_pair(basis, lambda x: 0.0, 0.0,
                                 (0.0, a0 ** 0.25), grid)
    w2, dw2 = reference_ivp_pair(basis, lambda x: 0.0, 0.0,
                                 (a0 ** -0.25, 0.0), grid)
    W = w1 * dw2 - w2 * dw1
    assert np.max(np.abs(W + 1.0)) <= 1e-8


def test_envelope_bound():
    # every solution is uniformly bounded by C a^{-1/4}
    basis, _ = power_basis(hi=30.0)
    grid = np.linspace(0.0, 30.0, 301)
    u = reference_ivp(basis, lambda x: 0.0, 0.0, (0.3, 0.7), grid)
    amp = np.array([basis.a_func(x) ** -0.25 for x in grid])
    C = np.max(np.abs(u) / amp)
    grid2 = np.linspace(0.0, 30.0, 601)
    u2 = reference_ivp(basis, lambda x: 0.0, 0.0, (0.3, 0.7), grid2)
    amp2 = np.array([basis.a_func(x) ** -0.25 for x in grid2])
    C2 = np.max(np.abs(u2) / amp2)
    assert np.isfinite(C) and abs(C2 - C) / C < 0.05


def test_inhomogeneous_vp():
    grid = np.linspace(0.0, np.pi, 3142)
    b = const_basis(hi=4.0)
    w1 = np.sin(grid)
    w2 = np.cos(grid)
    u = inhomogeneous_vp(b, w1, w2, lambda x: 1.0, grid)
    assert np.max(np.abs(u - (1.0 - np.cos(grid)))) < 1e-6
    assert u[-1] == pytest.approx(2.0, abs=1e-6)
    u0 = inhomogeneous_vp(b, w1, w2, lambda x: 0.0, grid)
    assert np.all(u0 == 0)
    with pytest.raises(ValueError):
        inhomogeneous_vp(b, w1[:5], w2, lambda x: 1.0, grid)


def test_inhomogeneous_vp_vs_reference():
    # oscillator forced by the resolvent-route source, cross-checked
    basis, m = power_basis(hi=10.0)
    grid = np.linspace(0.0, 10.0, 16001)
    q_src = lambda x: -16.0 * np.pi ** 2 * float(a_of_T(m, x)) * x
    w1, dw1 = reference_ivp_pair(basis, lambda x: 0.0, 0.0,
                                 (0.0, basis.a_func(0.0) ** 0.25), grid)
    w2, dw2 = reference_ivp_pair(basis, lambda x: 0.0, 0.0,
                                 (basis.a_func(0.0) ** -0.25, 0.0), grid)
    u_vp = inhomogeneous_vp(basis, w1, w2, q_src, grid)
    u_ref = reference_ivp(basis, q_src, 0.0, (0.0, 0.0), grid)
    assert np.max(np.abs(u_vp - u_ref)) / np.max(np.abs(u_ref)) < 1e-6


def test_lg_vs_reference_within_budget():
    # amplitude-normalized deviation obeys exp(V) - 1 at every node
    basis, _ = power_basis(hi=30.0)
    grid = np.linspace(0.0, 30.0, 121)
    a0 = basis.a_func(0.0)
    u, _ = reference_ivp_pair(basis, lambda x: 0.0, 0.0, (0.0, a0 ** 0.25),
                              grid)
    for i, x in enumerate(grid):
        V, bound = lg_error_budget(basis, x)
        defect = abs(u[i] * basis.a_func(x) ** 0.25 - np.sin(basis.xi(x)))
        assert defect <= bound + 1e-9
