"""Microwave-crosstalk simulator for simultaneous single-qubit gates on two
transmons with a tunable coupler, plus the virtual-Z mitigation harness."""

from .calibration import (
    CalibratedGate,
    CalibrationCache,
    OptimizerConfig,
    calibrate_sqrt_x,
    gate_fidelity,
    nelder_mead,
    single_qubit_fidelity,
)
from .device import (
    TWO_PI,
    DeviceParams,
    DressedSpectrum,
    ErrorScales,
    SuppressionPoint,
    build_static_hamiltonian,
    dressed_spectrum,
    find_zz_suppression_point,
    predict_error_scales,
    xy_coupling,
    zz_coupling,
)
from .drive import DriveSchedule, PulseParams, apply_virtual_z, drag_envelope, drive_hamiltonian
from .errors import (
    AccuracyError,
    CalibrationError,
    ConfigError,
    ContractViolationError,
    HybridizationError,
    InvalidDimensionError,
    ObjectiveError,
)
from .mitigation import (
    GateSpec,
    MitigationResult,
    SweepRecord,
    SweepSettings,
    build_simultaneous_circuit,
    optimize_virtual_z,
    run_leakage_sweep,
    run_mitigation_sweep,
    simulate_circuit,
    u3_matrix,
)
from .operators import ModeLayout, annihilation, creation, embed, hermitian_eigensystem
from .propagation import (
    COMPUTATIONAL_LABELS,
    PropagationResult,
    leakage_populations,
    project_computational,
    propagate,
    propagate_columns,
    run_schedule,
    to_rotating_frame,
)

__version__ = "0.1.0"
