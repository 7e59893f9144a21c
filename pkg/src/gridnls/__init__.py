"""Ground states and interpolation constants for the focusing NLS energy on a grid graph."""

from .families import (
    ExpFamilyParams,
    compact_edge_soliton,
    energy_asymptotic_probe,
    soliton_constants,
    soliton_derivative,
    soliton_profile,
    u_eps,
    u_eps_closed_forms,
)
from .functionals import (
    EnergyBreakdown,
    InequalityReport,
    QuotientValue,
    check_inequality,
    critical_mass_from_kp,
    energy,
    energy_gradient,
    energy_identity_check,
    gn_quotient,
    pl_quotient,
    run_inequality_suite,
)
from .grid import (
    GraphFunction,
    GridGraph,
    GridSpec,
    build_grid,
    dump_function,
    edge_values,
    embed_edge_function,
    grad_l1,
    kinetic,
    load_function,
    lp_power_exact,
    lp_power_trapezoid,
    mass,
    mass_exact,
    norm_linf,
    norm_lp,
    random_graph_function,
    translate,
    vertex_continuity_gap,
    zero_function,
)
from .minimize import (
    ConstantEstimate,
    MinimizeConfig,
    MinimizeResult,
    center_state,
    estimate_critical_mass,
    maximize_quotient,
    minimize_energy,
)
from .rearrangement import LineFunction, count_preimages, symmetric_rearrangement
from .sweep import PhasePoint, SweepSpec, run_sweep, sweep_to_csv

__version__ = "0.1.0"
