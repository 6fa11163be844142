"""Adaptive fuzzy PI excitation control of a synchronous generator."""

from .errors import (
    ConfigError,
    DegenerateOwnAdmittance,
    EmptyWindow,
    ExcitasimError,
    LossOfSynchronism,
    NoConvergence,
    ParseError,
    SimulationError,
    SingularJacobian,
    SingularNetwork,
    Unstable,
    ZeroActivation,
)
from .fuzzy import (
    ControllerState,
    FuzzyPIConfig,
    RuleTable,
    TriangularPartition,
    controller_step,
    defuzzify,
    fuzzify,
    infer,
)
from .linearize import (
    ContinuousLinearModel,
    DiscreteTF,
    discretize_zoh,
    jacobian_reduced,
    tf_from_state_space,
    validate_small_signal,
)
from .model import (
    AlgebraicOutputs,
    ComplexAdmittance,
    GeneratorParams,
    GeneratorState,
    LineParams,
    MechanicalInput,
    Model,
    NetworkAdmittance,
    ReducedState,
    admittances_from_line_and_load,
    derivatives_full,
    derivatives_reduced,
    find_equilibrium,
    invert_network,
    solve_network_full,
    solve_network_reduced,
)
from .simulation import (
    EventKind,
    Metrics,
    ScenarioConfig,
    ScenarioEvent,
    TimeSeries,
    compare_adaptive,
    compute_metrics,
    paper_scenario,
    run_closed_loop,
)
from .tuner import Mode, TunerConfig, TunerState, tuner_step, tuner_trace

__version__ = "0.1.0"
