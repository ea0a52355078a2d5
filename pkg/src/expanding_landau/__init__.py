"""Numerical laboratory for collisionless (Landau) damping of a plasma
on a torus whose metric expands with a scale factor a(t).

Subsystems: cosmology (time renormalization and admissible scale
factors), equilibrium (background profiles and mode kernels), penrose
(dielectric stability margins), volterra (resolvent kernels of the
linearized density equation), liouville_green (WKB error budgets),
gevrey (regularity norms and generator diagnostics), kinetic (the
nonlinear spectral solver), cli (experiment harness).
"""

from .cosmology import ScaleFactorKind, ScaleFactorModel, a_of_T, \
    background_field, check_admissibility, friedman_residual, t_of_tau, \
    tau_of_t
from .equilibrium import ATTRACTIVE, REPULSIVE, Equilibrium, \
    EquilibriumKind, InteractionSign, kernel_K, kernel_M, mu_hat, mu_value
from .gevrey import GevreyParams, bracket, fd_derivative, generator_F, \
    generator_G, gevrey_norm_torus, multiplier_A, sliding_z
from .kinetic import BlowUpError, SimConfig, SimMode, SpectralState, \
    density_modes, h_infinity_report, init_state, rhs, run_simulation, step
from .liouville_green import LGBasis, inhomogeneous_vp, lg_error_budget, \
    lg_fundamental, reference_ivp, reference_ivp_pair, wronskian_defect
from .penrose import KAPPA_TOL, PenroseReport, adapted_margin_d5, \
    dielectric, jeans_length, penrose_margin
from .volterra import ResolventTable, TauGrid, apply_resolvent, \
    check_resolvent_bound, closed_form_resolvent_q0, comparison_bound, \
    resolvent_column, resolvent_table, resolvent_via_ode, solve_volterra

__version__ = "0.1.0"
