"""Numerical laboratory for viscous ion shock profiles.

Builds traveling-wave solutions of the 1-D isothermal Navier-Stokes-Poisson
system, evolves perturbed Cauchy data with the electric potential re-solved
as a constraint, tracks the dynamically defined shift of the reference wave,
and measures the stability diagnostics (weighted relative functional, good
terms, shift bounds, conservation budgets) that witness orbital stability.
"""

from .config import Config, PerturbationSpec, config_from_dict, load_config
from .errors import (
    DegenerateShock,
    LaxViolation,
    NewtonDiverged,
    NoConnection,
    NonPositiveVolume,
    NsplabError,
    ParseError,
    UnexpectedSpectrum,
    ValidationError,
    ZeroDenominator,
)
from .evolve import (
    ConservationReport,
    State,
    Stepper,
    cfl_dt,
    conservation_report,
    run,
    step,
)
from .grid import Grid
from .lab import (
    DiagnosticsRecord,
    ExperimentResult,
    acceptance_report,
    emit,
    make_initial,
    run_experiment,
    run_sweep,
)
from .poisson import (
    PhiField,
    electric_force,
    flux_identity_residual,
    poisson_residual,
    solve_phi,
)
from .profile import (
    EndStates,
    ProfileReport,
    ProfileSolverParams,
    ShockProfile,
    check_lax,
    eval_profile,
    profile_rhs,
    shock_speed,
    solve_profile,
    verify_profile,
)
from .relent import (
    EtaSnapshot,
    GoodTerms,
    RelConstants,
    elliptic_ratio,
    eta_density,
    eta_integral,
    good_terms,
    rel_bounds_check,
    rel_p,
    rel_q,
    sobolev_norm,
)
from .shift import (
    ShiftedFrame,
    ShiftState,
    advance_shift,
    shift_rhs,
    shifted_frame,
    weight_a,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
