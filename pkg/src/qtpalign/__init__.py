"""Qubit teleportation protocols in Bloch/Fano form."""

__version__ = "0.1.0"

from .aligned import (
    AlignedOutcome,
    AlignedSpec,
    FeasibilityReport,
    GridSpec,
    ScanResult,
    build_aligned,
    build_dqtp,
    feasibility,
    fidelity_target,
    scan_region,
)
from .channels import (
    AffineChannel,
    WernerCase,
    WernerClass,
    apply_local,
    decompose_perfect_plus_noise,
    depolarizing,
    noise_conditions,
    werner_feasible,
)
from .metrics import (
    Lebedev,
    MonteCarlo,
    SphereAverage,
    avg_fidelity_closed,
    dbar,
    fidelity,
    fidelity_deviation_closed,
    sphere_average,
    trace_distance,
    trace_fidelity_gap,
)
from .povm import PovmElement, PovmSet, bell_povm, validate_closure
from .protocol import (
    InducedChannel,
    OutcomeRecord,
    Protocol,
    execute,
    execute_oracle,
    induced_channel,
    is_aligned,
)
from .states import BellLabel, QubitState, TwoQubitFano, bell_state, werner_state
