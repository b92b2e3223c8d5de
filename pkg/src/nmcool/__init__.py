"""nmcool: cavity-assisted laser cooling of a nuclear-magnon mode.

Derives effective two-mode master-equation parameters from hardware-level
inputs (nuclear species, lattice, pump, cavity) and solves the Lindblad
dynamics: cooling trajectories, steady states, entropy suppression, parameter
sweeps, and Q-switched cooling below the continuous back-heating floor.
"""

__version__ = "0.1.0"

from .hilbert import (  # noqa: E402
    DensityMatrix,
    FockSpace,
    OperatorMatrix,
    StateValidationError,
    annihilation,
    make_space,
    mode_population,
    partial_trace,
    thermal_entropy,
    thermal_state,
    von_neumann_entropy,
)
from .magnonics import (  # noqa: E402
    EffectiveParams,
    ElectronicToyModel,
    PhysicalConfig,
    ResonanceError,
    collective_coupling,
    derive_effective_params,
    four_magnon_rate,
    magnon_dispersion,
    onq_estimate,
    onq_sum_over_states,
    thermal_occupation,
    zero_point_field,
)
from .liouvillian import (  # noqa: E402
    IntegrationError,
    LindbladGenerator,
    RateSchedule,
    SteadyStateError,
    TrajectoryRecord,
    build_generator,
    build_hamiltonian,
    propagate,
    steady_state,
    validate_state,
)
from .protocols import (  # noqa: E402
    CoolingOutcome,
    QSwitchSchedule,
    SweepAxis,
    backheating_floor,
    default_qswitch_schedule,
    run_cooling,
    run_q_switched,
    sweep_steady,
    weak_coupling_steady,
)

__all__ = [
    "__version__",
    "CoolingOutcome",
    "DensityMatrix",
    "EffectiveParams",
    "ElectronicToyModel",
    "FockSpace",
    "IntegrationError",
    "LindbladGenerator",
    "OperatorMatrix",
    "PhysicalConfig",
    "QSwitchSchedule",
    "RateSchedule",
    "ResonanceError",
    "StateValidationError",
    "SteadyStateError",
    "SweepAxis",
    "TrajectoryRecord",
    "annihilation",
    "backheating_floor",
    "build_generator",
    "build_hamiltonian",
    "collective_coupling",
    "default_qswitch_schedule",
    "derive_effective_params",
    "four_magnon_rate",
    "magnon_dispersion",
    "make_space",
    "mode_population",
    "onq_estimate",
    "onq_sum_over_states",
    "partial_trace",
    "propagate",
    "run_cooling",
    "run_q_switched",
    "steady_state",
    "sweep_steady",
    "thermal_entropy",
    "thermal_occupation",
    "thermal_state",
    "validate_state",
    "von_neumann_entropy",
    "weak_coupling_steady",
    "zero_point_field",
]
