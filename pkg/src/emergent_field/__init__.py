"""Emergent particle fields from guided scalar-field modes in a box."""
from .emergence import (
    RadialProfile, compare_profiles, oracle_field, reconstruct_field, reconstruct_from_trajectory,
    shell_integral,
)
from .exceptions import (
    DegenerateCurrentError, EmptyShellError, InvalidParameterError, LatticeMismatchError, NodeError,
    StencilError,
)
from .guidance import (
    ShellSet, TrajectoryRecord, analytic_mode_solution, guidance_rhs, integrate_modes, shell_modes,
    standing_wave_state,
)
from .modes import (
    FieldSample, GridSpec, ModeLattice, ModeState, analyze_field, build_lattice, dispersion,
    synthesize_field,
)
from .relativity import (
    Boost, SpacetimeEvent, bohmian_velocity, boost_event, boosted_emergent_field, integrate_particle_path,
    kinematic_phase_check, mackinnon_field, wave_operator_residual,
)
from .wavefunctional import (
    OneQuantumState, VacuumState, apply_creation, eval_log_vacuum, eval_one_quantum, grad_S, phase_S,
)

__version__ = "0.1.0"

_ESTIMATORS = ("EmergentField", "ModeTransformer", "StandingWaveGuidance")


def __getattr__(name):
    # scikit-learn is only imported when an estimator is requested
    if name in _ESTIMATORS:
        from . import estimators

        return getattr(estimators, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
