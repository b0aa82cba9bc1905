"""Z-X-Z-X-Z gate decomposition, simultaneous-circuit builder, virtual-Z
mitigation optimizer, and the detuning sweep experiments.

An arbitrary single-qubit gate is realized as

    U(θ, φ, λ) = Z_{φ−π/2} · X_{π/2} · Z_{π−θ} · X_{π/2} · Z_{λ−π/2}

with Z_α = exp(−i α Z / 2) and the calibrated sqrt(X) pulse supplying
X_{π/2}.  The Z factors are virtual: each one advances the line's phase
accumulator, the two pulses carry the intermediate accumulator values, and
the final accumulated angle (λ + φ − θ) is applied in software as an exact
diagonal rotation after projection.  Pushing every Z factor through the
pulses shows the circuit then reproduces U(θ, φ, λ) exactly in the ideal
limit.

Crosstalk mitigation re-optimizes the six angles {θ'_l, φ'_l, λ'_l} of the
two simultaneous gates while the target stays at the nominal angles; only
zero-duration phases change, so the circuit time is fixed at two pulse
lengths.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import (
    CalibratedGate,
    CalibrationCache,
    OptimizerConfig,
    calibrate_sqrt_x,
    default_calibration_config,
    gate_fidelity,
    nelder_mead,
)
from .device import (
    TWO_PI,
    DeviceParams,
    DressedSpectrum,
    build_static_hamiltonian,
    dressed_spectrum,
    find_zz_suppression_point,
)
from .drive import DriveSchedule, apply_virtual_z
from .errors import CalibrationError, ConfigError, HybridizationError
from .operators import ModeLayout
from .propagation import (
    COMPUTATIONAL_LABELS,
    MAX_STEP,
    PropagationResult,
    propagate_columns,
    run_schedule,
    to_rotating_frame,
)

__all__ = [
    "GateSpec",
    "MitigationResult",
    "SweepRecord",
    "SweepSettings",
    "u3_matrix",
    "build_simultaneous_circuit",
    "simulate_circuit",
    "optimize_virtual_z",
    "run_leakage_sweep",
    "run_mitigation_sweep",
]

LEAK_Q0 = (2, 0, 0)
LEAK_Q1 = (0, 0, 2)


@dataclass(frozen=True)
class GateSpec:
    """(θ, φ, λ) angles of a parameterized single-qubit gate, in radians."""

    theta: float
    phi: float
    lam: float

    @classmethod
    def from_2pi(cls, theta: float, phi: float, lam: float) -> "GateSpec":
        """Build from angles quoted as fractions of 2π (the reporting unit)."""
        return cls(TWO_PI * theta, TWO_PI * phi, TWO_PI * lam)

    def as_2pi(self) -> tuple[float, float, float]:
        return (self.theta / TWO_PI, self.phi / TWO_PI, self.lam / TWO_PI)


def _rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


_X90 = np.array([[1.0, -1.0j], [-1.0j, 1.0]], dtype=np.complex128) / math.sqrt(2.0)


def u3_matrix(spec: GateSpec) -> np.ndarray:
    """The five-factor product Z_{φ−π/2} X_{π/2} Z_{π−θ} X_{π/2} Z_{λ−π/2}."""
    return (_rz(spec.phi - 0.5 * math.pi) @ _X90 @ _rz(math.pi - spec.theta)
            @ _X90 @ _rz(spec.lam - 0.5 * math.pi))


def build_simultaneous_circuit(specs: tuple[GateSpec, GateSpec],
                               calibrated: tuple[CalibratedGate, CalibratedGate],
                               params: DeviceParams, spectrum: DressedSpectrum,
                               ) -> tuple[DriveSchedule, tuple[float, float]]:
    """Schedule two simultaneous gates as aligned sqrt(X) layers plus virtual Z.

    Returns the schedule and the per-qubit trailing Z angles (the full
    accumulated virtual-Z phase, λ + φ − θ) to be applied in post-processing.
    """
    if calibrated[0].t_gate != calibrated[1].t_gate:
        raise ConfigError("the two calibrated gates must share one gate time")
    t_gate = calibrated[0].t_gate
    schedule = DriveSchedule(frame_freqs=(spectrum.omega01_q0, spectrum.omega01_q1))
    for q, spec in enumerate(specs):
        schedule = apply_virtual_z(schedule, q, spec.lam - 0.5 * math.pi)
        schedule = schedule.with_pulse(q, calibrated[q].pulse, t_start=0.0)
        schedule = apply_virtual_z(schedule, q, math.pi - spec.theta)
        schedule = schedule.with_pulse(q, calibrated[q].pulse, t_start=t_gate)
        schedule = apply_virtual_z(schedule, q, spec.phi - 0.5 * math.pi)
    return schedule, schedule.vz_phase


def _trailing_matrix(trailing: tuple[float, float]) -> np.ndarray:
    return np.kron(_rz(trailing[0]), _rz(trailing[1]))


def simulate_circuit(schedule: DriveSchedule, trailing: tuple[float, float],
                     params: DeviceParams, spectrum: DressedSpectrum,
                     layout: ModeLayout, step: float = MAX_STEP,
                     initial=None, verify_step: bool = False,
                     ) -> tuple[np.ndarray, PropagationResult]:
    """Propagate a circuit schedule and apply the trailing frame rotations.

    Returns the implemented 4×4 gate (trailing Z included) and the full
    propagation bundle.
    """
    if schedule.duration == 0.0:
        eye = np.eye(layout.dim, dtype=np.complex128)
        result = PropagationResult(full=eye, frame=eye,
                                   gate=np.eye(4, dtype=np.complex128), populations={})
        return _trailing_matrix(trailing) @ result.gate, result
    h_static = build_static_hamiltonian(params, layout)
    result = run_schedule(h_static, schedule, params, layout, spectrum, step=step,
                          initial=initial, verify_step=verify_step)
    return _trailing_matrix(trailing) @ result.gate, result


def _circuit_gate(h_static, schedule, trailing, params, spectrum, layout, step,
                  comp_states):
    """Fast path: 4×4 implemented gate plus leakage from |101>, via columns."""
    cols = propagate_columns(h_static, schedule, params, layout, 0.0,
                             schedule.duration, comp_states, step=step)
    leak = {
        LEAK_Q0: float(np.abs(np.vdot(spectrum.state(LEAK_Q0), cols[:, 3])) ** 2),
        LEAK_Q1: float(np.abs(np.vdot(spectrum.state(LEAK_Q1), cols[:, 3])) ** 2),
    }
    frame_cols = to_rotating_frame(cols, spectrum, schedule.duration)
    gate = comp_states.conj().T @ frame_cols
    return _trailing_matrix(trailing) @ gate, leak


@dataclass(frozen=True)
class MitigationResult:
    """Nominal and optimized gate angles with the three benchmark fidelities."""

    nominal: tuple[GateSpec, GateSpec]
    optimized: tuple[GateSpec, GateSpec]
    fidelity_ideal: float
    fidelity_crosstalk: float
    fidelity_mitigated: float
    evals: int
    leak: dict = field(default_factory=dict, repr=False)


def optimize_virtual_z(nominal: tuple[GateSpec, GateSpec], params: DeviceParams,
                       calibrated: tuple[CalibratedGate, CalibratedGate],
                       spectrum: DressedSpectrum, layout: ModeLayout,
                       config: OptimizerConfig | None = None,
                       step: float = MAX_STEP) -> MitigationResult:
    """Maximize the simultaneous-gate fidelity over the six virtual-Z angles.

    The target is u3(nominal_0) ⊗ u3(nominal_1); the circuit runs with the
    primed angles.  The ideal fidelity uses the same calibration with the
    crosstalk switched off, the crosstalk fidelity is the objective at the
    nominal start point, and since the search starts there the mitigated
    fidelity can never fall below it.
    """
    if config is None:
        config = OptimizerConfig(restarts=1, initial_step=(0.05,) * 6)
    target = np.kron(u3_matrix(nominal[0]), u3_matrix(nominal[1]))
    h_static = build_static_hamiltonian(params, layout)
    comp_states = np.column_stack([spectrum.state(lab) for lab in COMPUTATIONAL_LABELS])

    def run(specs, at_params):
        schedule, trailing = build_simultaneous_circuit(specs, calibrated, at_params, spectrum)
        return _circuit_gate(h_static, schedule, trailing, at_params, spectrum,
                             layout, step, comp_states)

    ideal_params = replace(params, p0=0.0, p1=0.0)
    gate_ideal, _ = run(nominal, ideal_params)
    fidelity_ideal = gate_fidelity(target, gate_ideal)
    gate_xtalk, leak = run(nominal, params)
    fidelity_crosstalk = gate_fidelity(target, gate_xtalk)

    def unpack(x) -> tuple[GateSpec, GateSpec]:
        return (GateSpec(x[0], x[1], x[2]), GateSpec(x[3], x[4], x[5]))

    def objective(x):
        gate, _ = run(unpack(x), params)
        return 1.0 - gate_fidelity(target, gate)

    x0 = np.array([nominal[0].theta, nominal[0].phi, nominal[0].lam,
                   nominal[1].theta, nominal[1].phi, nominal[1].lam])
    result = nelder_mead(objective, x0, config)
    fidelity_mitigated = 1.0 - result.fun
    optimized = unpack(result.x)
    if fidelity_mitigated < fidelity_crosstalk:
        # the nominal point is in the search space, so never report worse
        fidelity_mitigated = fidelity_crosstalk
        optimized = nominal
    return MitigationResult(nominal=nominal, optimized=optimized,
                            fidelity_ideal=fidelity_ideal,
                            fidelity_crosstalk=fidelity_crosstalk,
                            fidelity_mitigated=fidelity_mitigated,
                            evals=result.evals, leak=leak)


# ---------------------------------------------------------------------------
# Sweep experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRecord:
    """One detuning point of a sweep; unused fields stay at NaN/None."""

    delta: float                 # qubit-qubit detuning (rad/ns)
    omega_c: float               # parked coupler frequency (rad/ns)
    p0: float
    p1: float
    fidelity_ideal: float = math.nan
    fidelity_crosstalk: float = math.nan
    fidelity_mitigated: float = math.nan
    leak_q0_200: float = math.nan
    leak_q1_002: float = math.nan
    optimized: tuple[GateSpec, GateSpec] | None = None
    calibration_infidelity: tuple[float, float] | None = None
    evals: int = 0
    flags: tuple[str, ...] = ()

    @property
    def skipped(self) -> bool:
        return any(f.startswith(("hybridization", "calibration-failure")) for f in self.flags)

    @property
    def delta_ghz(self) -> float:
        return self.delta / TWO_PI


@dataclass(frozen=True)
class SweepSettings:
    """Shared knobs of the sweep pipeline."""

    t_gate: float = 12.0
    layout: ModeLayout = ModeLayout()
    step: float = MAX_STEP
    coupler_offsets: tuple[float, float] = (TWO_PI * 0.4, TWO_PI * 2.2)
    coupler_points: int = 61
    calibration: OptimizerConfig | None = None
    mitigation: OptimizerConfig | None = None
    seed: int = 0
    workers: int = 1


def _collision_flags(delta: float, params: DeviceParams) -> tuple[str, ...]:
    flags = []
    if abs(delta) < TWO_PI * 1e-6:
        flags.append("collision:delta-zero")
    if abs(delta - abs(params.eta1)) < TWO_PI * 1e-6:
        flags.append("collision:delta-eta1")
    return tuple(flags)


def _point_seed(base: int, index: int, salt: int = 0) -> int:
    return (base * 1000003 + index * 101 + salt) % (2**31 - 1)


def _prepare_point(base: DeviceParams, delta: float, settings: SweepSettings):
    """Set ω1 = ω0 + Δ, park the coupler, and diagonalize."""
    params = replace(base, omega1=base.omega0 + delta)
    top = max(params.omega0, params.omega1)
    point = find_zz_suppression_point(
        params, (top + settings.coupler_offsets[0], top + settings.coupler_offsets[1]),
        settings.layout, points=settings.coupler_points)
    params = replace(params, omega_c=point.omega_c)
    spectrum = dressed_spectrum(params, settings.layout)
    return params, spectrum


def _calibrate_pair(params: DeviceParams, settings: SweepSettings, spectrum,
                    seed: int, cache: CalibrationCache | None):
    gates = []
    fresh = []
    quiet = replace(params, p0=0.0, p1=0.0)
    for qubit in (0, 1):
        cached = cache.get(quiet, qubit, settings.t_gate, settings.layout) if cache else None
        if cached is not None:
            gates.append(cached)
            continue
        cfg = settings.calibration or default_calibration_config()
        cfg = replace(cfg, seed=_point_seed(seed, qubit, salt=7))
        gate = calibrate_sqrt_x(qubit, quiet, settings.t_gate, settings.layout,
                                config=cfg, spectrum=spectrum, step=settings.step)
        gates.append(gate)
        fresh.append(gate)
    return (gates[0], gates[1]), fresh


def _leakage_point(task) -> tuple[SweepRecord, list[dict]]:
    base, delta, settings, seed, cache_path = task
    cache = CalibrationCache(cache_path) if cache_path else None
    flags = _collision_flags(delta, base)
    try:
        params, spectrum = _prepare_point(base, delta, settings)
        (cal0, cal1), fresh = _calibrate_pair(params, settings, spectrum, seed, cache)
    except HybridizationError as err:
        return SweepRecord(delta=delta, omega_c=math.nan, p0=base.p0, p1=base.p1,
                           flags=flags + (f"hybridization:{err.label}",)), []
    except CalibrationError as err:
        return SweepRecord(delta=delta, omega_c=math.nan, p0=base.p0, p1=base.p1,
                           flags=flags + (f"calibration-failure:{err.infidelity:.2e}",)), []
    schedule = DriveSchedule(frame_freqs=(spectrum.omega01_q0, spectrum.omega01_q1))
    for layer in range(2):
        schedule = schedule.with_pulse(0, cal0.pulse, t_start=layer * settings.t_gate)
        schedule = schedule.with_pulse(1, cal1.pulse, t_start=layer * settings.t_gate)
    h_static = build_static_hamiltonian(params, settings.layout)
    psi = propagate_columns(h_static, schedule, params, settings.layout, 0.0,
                            schedule.duration, spectrum.state((1, 0, 1)),
                            step=settings.step)[:, 0]
    record = SweepRecord(
        delta=delta, omega_c=params.omega_c, p0=params.p0, p1=params.p1,
        leak_q0_200=float(np.abs(np.vdot(spectrum.state(LEAK_Q0), psi)) ** 2),
        leak_q1_002=float(np.abs(np.vdot(spectrum.state(LEAK_Q1), psi)) ** 2),
        calibration_infidelity=(cal0.infidelity, cal1.infidelity),
        flags=flags,
    )
    return record, [g.to_dict() for g in fresh]


def _mitigation_point(task) -> tuple[list[SweepRecord], list[dict]]:
    base, delta, p_values, nominal, settings, seed, cache_path = task
    cache = CalibrationCache(cache_path) if cache_path else None
    flags = _collision_flags(delta, base)
    try:
        params, spectrum = _prepare_point(base, delta, settings)
        (cal0, cal1), fresh = _calibrate_pair(params, settings, spectrum, seed, cache)
    except HybridizationError as err:
        bad = tuple(flags) + (f"hybridization:{err.label}",)
        return ([SweepRecord(delta=delta, omega_c=math.nan, p0=p, p1=p, flags=bad)
                 for p in p_values], [])
    except CalibrationError as err:
        bad = tuple(flags) + (f"calibration-failure:{err.infidelity:.2e}",)
        return ([SweepRecord(delta=delta, omega_c=math.nan, p0=p, p1=p, flags=bad)
                 for p in p_values], [])
    records = []
    for p in p_values:
        at_p = replace(params, p0=p, p1=p)
        cfg = settings.mitigation or OptimizerConfig(restarts=1, initial_step=(0.05,) * 6)
        cfg = replace(cfg, seed=_point_seed(seed, int(round(p * 1e6)), salt=13))
        res = optimize_virtual_z(nominal, at_p, (cal0, cal1), spectrum,
                                 settings.layout, config=cfg, step=settings.step)
        records.append(SweepRecord(
            delta=delta, omega_c=params.omega_c, p0=p, p1=p,
            fidelity_ideal=res.fidelity_ideal,
            fidelity_crosstalk=res.fidelity_crosstalk,
            fidelity_mitigated=res.fidelity_mitigated,
            leak_q0_200=res.leak.get(LEAK_Q0, math.nan),
            leak_q1_002=res.leak.get(LEAK_Q1, math.nan),
            optimized=res.optimized,
            calibration_infidelity=(cal0.infidelity, cal1.infidelity),
            evals=res.evals, flags=flags,
        ))
    return records, [g.to_dict() for g in fresh]


def _run_tasks(tasks, worker, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(min(workers, len(tasks))) as pool:
        return pool.map(worker, tasks)


def _merge_calibrations(cache: CalibrationCache | None, fresh_lists, layout):
    if cache is None:
        return
    for fresh in fresh_lists:
        for data in fresh:
            cache.put(CalibratedGate.from_dict(data), layout)
    cache.save()


def run_leakage_sweep(deltas, base: DeviceParams, settings: SweepSettings | None = None,
                      cache: CalibrationCache | None = None) -> list[SweepRecord]:
    """Two simultaneous sqrt(X) layers from dressed |101>: leakage vs detuning.

    Per grid point: ω1 = ω0 + Δ, the coupler is re-parked at the
    ZZ-suppression point, both qubits are calibrated without crosstalk, then
    the doubled sqrt(X) layer runs with the configured p values and the
    populations of dressed |002> and |200> are recorded.  Frequency-collision
    points are flagged; hybridization failures skip the point.
    """
    settings = settings or SweepSettings()
    cache_path = cache.path if cache else None
    tasks = [(base, float(d), settings, _point_seed(settings.seed, i), cache_path)
             for i, d in enumerate(deltas)]
    out = _run_tasks(tasks, _leakage_point, settings.workers)
    _merge_calibrations(cache, [fresh for _, fresh in out], settings.layout)
    return sorted([rec for rec, _ in out], key=lambda r: r.delta)


def run_mitigation_sweep(deltas, p_values, base: DeviceParams,
                         nominal: tuple[GateSpec, GateSpec],
                         settings: SweepSettings | None = None,
                         cache: CalibrationCache | None = None) -> list[SweepRecord]:
    """Ideal / crosstalk / mitigated fidelity triple on a (Δ, p) grid.

    Calibration is shared across the p values of a point.  Records come back
    sorted by (Δ, p), one per combination, with per-point failures flagged
    rather than aborting the sweep.
    """
    settings = settings or SweepSettings()
    cache_path = cache.path if cache else None
    tasks = [(base, float(d), tuple(p_values), nominal, settings,
              _point_seed(settings.seed, i), cache_path)
             for i, d in enumerate(deltas)]
    out = _run_tasks(tasks, _mitigation_point, settings.workers)
    _merge_calibrations(cache, [fresh for _, fresh in out], settings.layout)
    records = [rec for recs, _ in out for rec in recs]
    return sorted(records, key=lambda r: (r.delta, r.p0))
