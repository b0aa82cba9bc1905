"""Command-line harness: configuration loading, experiment dispatch, serialization.

Usage::

    xtalk-sim <experiment> --config <path> [--out <dir>] [--workers N] [--seed S]

Experiments: ``calibrate``, ``zz-sweep``, ``leakage-sweep``, ``mitigate-point``,
``mitigation-sweep``.  Each run writes one CSV of tabular records (schema in a
leading ``#`` comment line) and one JSON metadata document (config echo, code
version, per-point details, flags), both atomically via temp-file rename.
All frequencies in files are linear GHz, angles are fractions of 2π, times ns.

Exit codes: 0 success, 1 configuration error, 2 partial point failures,
3 I/O error.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .calibration import CalibrationCache, OptimizerConfig, calibrate_sqrt_x, default_calibration_config
from .device import TWO_PI, DeviceParams, dressed_spectrum, find_zz_suppression_point, xy_coupling, zz_coupling
from .errors import CalibrationError, ConfigError, HybridizationError
from .mitigation import (
    GateSpec,
    SweepSettings,
    _mitigation_point,
    _point_seed,
    run_leakage_sweep,
    run_mitigation_sweep,
)
from .operators import ModeLayout
from .propagation import MAX_STEP

EXPERIMENTS = ("calibrate", "zz-sweep", "leakage-sweep", "mitigate-point", "mitigation-sweep")

_DEVICE_KEYS = {
    "omega0_ghz", "omega1_ghz", "omegac_ghz", "eta0_ghz", "eta1_ghz", "etac_ghz",
    "g0c_ghz", "g1c_ghz", "g01_ghz", "p0", "p1", "xtalk_phase",
}
_GRID_KEYS = {"start_ghz", "stop_ghz", "step_ghz", "values_ghz", "points"}
_OPT_KEYS = {"max_evals", "restarts", "tol", "early_stop", "initial_step"}
_TOP_KEYS = {
    "experiment", "device", "delta_grid_ghz", "delta_ghz", "p_values", "p",
    "gate_time_ns", "truncation", "step_ps", "coupler_offsets_ghz",
    "coupler_grid_ghz", "coupler_points", "nominal_specs", "calibration",
    "mitigation", "workers", "seed", "output", "calibration_cache",
}
_SPEC_KEYS = {"theta0_over_2pi", "phi0_over_2pi", "lambda0_over_2pi",
              "theta1_over_2pi", "phi1_over_2pi", "lambda1_over_2pi"}


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _need(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing required key '{key}' in {where}")
    return section[key]


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration (angular units internally)."""

    experiment: str
    device: DeviceParams
    deltas: tuple[float, ...] = ()          # rad/ns
    p_values: tuple[float, ...] = ()
    gate_time: float = 12.0                 # ns
    layout: ModeLayout = ModeLayout()
    step: float = MAX_STEP                  # ns
    coupler_offsets: tuple[float, float] = (TWO_PI * 0.4, TWO_PI * 2.2)
    coupler_grid: tuple[float, ...] = ()    # rad/ns, zz-sweep only
    coupler_points: int = 61
    nominal: tuple[GateSpec, GateSpec] | None = None
    calibration: OptimizerConfig | None = None
    mitigation: OptimizerConfig | None = None
    workers: int = 0                        # 0 = auto
    seed: int = 0
    output: str = "runs"
    calibration_cache: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def settings(self) -> SweepSettings:
        workers = self.workers if self.workers > 0 else (os.cpu_count() or 1)
        return SweepSettings(
            t_gate=self.gate_time, layout=self.layout, step=self.step,
            coupler_offsets=self.coupler_offsets, coupler_points=self.coupler_points,
            calibration=self.calibration, mitigation=self.mitigation,
            seed=self.seed, workers=workers,
        )


def _parse_grid(section, where: str) -> tuple[float, ...]:
    if isinstance(section, list):
        return tuple(TWO_PI * float(v) for v in section)
    _check_keys(section, _GRID_KEYS, where)
    if "values_ghz" in section:
        return tuple(TWO_PI * float(v) for v in section["values_ghz"])
    start = float(_need(section, "start_ghz", where))
    stop = float(_need(section, "stop_ghz", where))
    if "points" in section:
        values = np.linspace(start, stop, int(section["points"]))
    else:
        step = float(_need(section, "step_ghz", where))
        values = np.arange(start, stop + 0.5 * step, step)
    return tuple(TWO_PI * round(float(v), 12) for v in values)


def _parse_device(section: dict) -> DeviceParams:
    _check_keys(section, _DEVICE_KEYS, "device")
    for key in ("omega0_ghz", "omega1_ghz", "eta0_ghz", "eta1_ghz", "etac_ghz",
                "g0c_ghz", "g1c_ghz", "g01_ghz"):
        _need(section, key, "device")
    try:
        return DeviceParams.from_ghz(
            omega0=float(section["omega0_ghz"]),
            omega1=float(section["omega1_ghz"]),
            omega_c=float(section.get("omegac_ghz", section["omega0_ghz"] + 1.0)),
            eta0=float(section["eta0_ghz"]),
            eta1=float(section["eta1_ghz"]),
            eta_c=float(section["etac_ghz"]),
            g0c=float(section["g0c_ghz"]),
            g1c=float(section["g1c_ghz"]),
            g01=float(section["g01_ghz"]),
            p0=float(section.get("p0", 0.0)),
            p1=float(section.get("p1", 0.0)),
            xtalk_phase=float(section.get("xtalk_phase", 0.0)),
        )
    except ValueError as err:
        raise ConfigError(f"device: {err}") from None


def _parse_optimizer(section: dict, where: str) -> OptimizerConfig:
    _check_keys(section, _OPT_KEYS, where)
    kwargs = dict(section)
    if "initial_step" in kwargs:
        kwargs["initial_step"] = tuple(float(v) for v in kwargs["initial_step"])
    try:
        return OptimizerConfig(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{where}: {err}") from None


def _parse_specs(section: dict) -> tuple[GateSpec, GateSpec]:
    _check_keys(section, _SPEC_KEYS, "nominal_specs")
    for key in _SPEC_KEYS:
        _need(section, key, "nominal_specs")
    return (
        GateSpec.from_2pi(section["theta0_over_2pi"], section["phi0_over_2pi"],
                          section["lambda0_over_2pi"]),
        GateSpec.from_2pi(section["theta1_over_2pi"], section["phi1_over_2pi"],
                          section["lambda1_over_2pi"]),
    )


def bundled_config_path(name: str):
    """Path of a reference config shipped with the package, if it exists."""
    candidate = importlib.resources.files("xtalk_sim") / "configs" / name
    return candidate if candidate.is_file() else None


def load_config(path: str) -> RunConfig:
    """Parse and validate a JSON run configuration (strict about unknown keys)."""
    actual = path
    if not os.path.exists(path):
        bundled = bundled_config_path(os.path.basename(path))
        if bundled is None:
            raise ConfigError(f"config file not found: {path}")
        actual = str(bundled)
    with open(actual, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"config is not valid JSON (line {err.lineno}): {err.msg}") from None
    _check_keys(raw, _TOP_KEYS, "top level")
    experiment = _need(raw, "experiment", "top level")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got '{experiment}'")
    device = _parse_device(_need(raw, "device", "top level"))

    deltas: tuple[float, ...] = ()
    if experiment in ("calibrate", "leakage-sweep", "mitigation-sweep"):
        deltas = _parse_grid(_need(raw, "delta_grid_ghz", "top level"), "delta_grid_ghz")
    elif experiment == "mitigate-point":
        deltas = (TWO_PI * float(_need(raw, "delta_ghz", "top level")),)

    p_values: tuple[float, ...] = ()
    if experiment == "mitigation-sweep":
        p_values = tuple(float(v) for v in _need(raw, "p_values", "top level"))
    elif experiment == "mitigate-point":
        p_values = (float(raw.get("p", device.p0)),)

    nominal = None
    if experiment in ("mitigate-point", "mitigation-sweep"):
        nominal = _parse_specs(_need(raw, "nominal_specs", "top level"))

    coupler_grid: tuple[float, ...] = ()
    if experiment == "zz-sweep":
        coupler_grid = _parse_grid(_need(raw, "coupler_grid_ghz", "top level"),
                                   "coupler_grid_ghz")

    truncation = int(raw.get("truncation", 4))
    step_ps = float(raw.get("step_ps", 2.0))
    if step_ps > 2.0:
        raise ConfigError(f"step_ps must be <= 2.0 (carrier resolution), got {step_ps}")
    offsets = raw.get("coupler_offsets_ghz", [0.4, 2.2])
    if len(offsets) != 2 or not offsets[1] > offsets[0]:
        raise ConfigError("coupler_offsets_ghz must be [low, high] with high > low")

    return RunConfig(
        experiment=experiment,
        device=device,
        deltas=deltas,
        p_values=p_values,
        gate_time=float(raw.get("gate_time_ns", 12.0)),
        layout=ModeLayout((truncation,) * 3),
        step=step_ps * 1e-3,
        coupler_offsets=(TWO_PI * float(offsets[0]), TWO_PI * float(offsets[1])),
        coupler_grid=coupler_grid,
        coupler_points=int(raw.get("coupler_points", 61)),
        nominal=nominal,
        calibration=_parse_optimizer(raw["calibration"], "calibration") if "calibration" in raw else None,
        mitigation=_parse_optimizer(raw["mitigation"], "mitigation") if "mitigation" in raw else None,
        workers=int(raw.get("workers", 0)),
        seed=int(raw.get("seed", 0)),
        output=str(raw.get("output", "runs")),
        calibration_cache=raw.get("calibration_cache"),
        raw=raw,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".12g")
    return str(value)


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, header: list[str], rows: list[list]):
    lines = ["# " + ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _write_atomic(path, "\n".join(lines) + "\n")


def _record_flags(record) -> str:
    return ";".join(record.flags)


# ---------------------------------------------------------------------------
# experiment runners: each returns (csv_header, csv_rows, extra_metadata)
# ---------------------------------------------------------------------------

def _run_calibrate(config: RunConfig):
    cache = CalibrationCache(config.calibration_cache) if config.calibration_cache else None
    header = ["delta_ghz", "qubit", "amplitude_ghz", "drag_coeff",
              "freq_offset_ghz", "drive_freq_ghz", "infidelity", "flags"]
    rows, meta, failures = [], [], 0
    for i, delta in enumerate(config.deltas):
        params = replace(config.device, omega1=config.device.omega0 + delta, p0=0.0, p1=0.0)
        top = max(params.omega0, params.omega1)
        try:
            point = find_zz_suppression_point(
                params, (top + config.coupler_offsets[0], top + config.coupler_offsets[1]),
                config.layout, points=config.coupler_points)
            params = replace(params, omega_c=point.omega_c)
            spectrum = dressed_spectrum(params, config.layout)
            for qubit in (0, 1):
                cached = cache.get(params, qubit, config.gate_time, config.layout) if cache else None
                if cached is None:
                    cfg = config.calibration or default_calibration_config()
                    cfg = replace(cfg, seed=_point_seed(config.seed, i, salt=qubit))
                    gate = calibrate_sqrt_x(qubit, params, config.gate_time, config.layout,
                                            config=cfg, spectrum=spectrum, step=config.step)
                    if cache:
                        cache.put(gate, config.layout)
                else:
                    gate = cached
                rows.append([delta / TWO_PI, qubit, gate.pulse.amplitude / TWO_PI,
                             gate.pulse.drag_coeff, gate.pulse.freq_offset / TWO_PI,
                             gate.pulse.freq / TWO_PI, gate.infidelity, ""])
                meta.append({"delta_ghz": delta / TWO_PI, "qubit": qubit,
                             "omega_c_ghz": params.omega_c / TWO_PI, **gate.to_dict()})
        except (HybridizationError, CalibrationError) as err:
            failures += 1
            rows.append([delta / TWO_PI, -1, None, None, None, None, None,
                         type(err).__name__])
            meta.append({"delta_ghz": delta / TWO_PI, "error": str(err)})
    if cache:
        cache.save()
    return header, rows, {"points": meta}, failures


def _run_zz_sweep(config: RunConfig):
    header = ["omega_c_ghz", "j_ghz", "zeta_ghz"]
    rows, failures = [], 0
    for wc in config.coupler_grid:
        params = replace(config.device, omega_c=wc)
        try:
            zeta = zz_coupling(params, config.layout)
            rows.append([wc / TWO_PI, xy_coupling(params) / TWO_PI, zeta / TWO_PI])
        except HybridizationError:
            failures += 1
            rows.append([wc / TWO_PI, None, None])
    point = find_zz_suppression_point(
        config.device, (config.coupler_grid[0], config.coupler_grid[-1]),
        config.layout, points=max(61, config.coupler_points))
    meta = {"suppression_point": {
        "omega_c_ghz": point.omega_c / TWO_PI,
        "zeta_ghz": point.zeta / TWO_PI,
        "kind": point.kind,
    }}
    return header, rows, meta, failures


def _run_leakage(config: RunConfig):
    settings = config.settings()
    cache = CalibrationCache(config.calibration_cache) if config.calibration_cache else None
    records = run_leakage_sweep(config.deltas, config.device, settings, cache=cache)
    header = ["delta_ghz", "leak_q0_200", "leak_q1_002", "flags"]
    rows = [[r.delta_ghz, r.leak_q0_200, r.leak_q1_002, _record_flags(r)] for r in records]
    meta = {"points": [_record_meta(r) for r in records]}
    return header, rows, meta, sum(r.skipped for r in records)


def _record_meta(r) -> dict:
    out = {
        "delta_ghz": r.delta_ghz,
        "omega_c_ghz": r.omega_c / TWO_PI if not math.isnan(r.omega_c) else None,
        "p0": r.p0, "p1": r.p1,
        "flags": list(r.flags),
        "evals": r.evals,
    }
    if r.calibration_infidelity is not None:
        out["calibration_infidelity"] = list(r.calibration_infidelity)
    if r.optimized is not None:
        out["optimized_specs"] = {
            "theta0_over_2pi": r.optimized[0].as_2pi()[0],
            "phi0_over_2pi": r.optimized[0].as_2pi()[1],
            "lambda0_over_2pi": r.optimized[0].as_2pi()[2],
            "theta1_over_2pi": r.optimized[1].as_2pi()[0],
            "phi1_over_2pi": r.optimized[1].as_2pi()[1],
            "lambda1_over_2pi": r.optimized[1].as_2pi()[2],
        }
    return out


_MITIGATION_HEADER = [
    "delta_ghz", "p", "omega_c_ghz", "infidelity_ideal", "infidelity_crosstalk",
    "infidelity_mitigated", "leak_q0_200", "leak_q1_002",
    "theta0_over_2pi", "phi0_over_2pi", "lambda0_over_2pi",
    "theta1_over_2pi", "phi1_over_2pi", "lambda1_over_2pi", "evals", "flags",
]


def _mitigation_rows(records):
    rows = []
    for r in records:
        if r.optimized is not None:
            s0, s1 = r.optimized[0].as_2pi(), r.optimized[1].as_2pi()
        else:
            s0 = s1 = (None, None, None)
        rows.append([
            r.delta_ghz, r.p0, r.omega_c / TWO_PI if not math.isnan(r.omega_c) else None,
            1.0 - r.fidelity_ideal, 1.0 - r.fidelity_crosstalk, 1.0 - r.fidelity_mitigated,
            r.leak_q0_200, r.leak_q1_002, *s0, *s1, r.evals, _record_flags(r),
        ])
    return rows


def _run_mitigation(config: RunConfig):
    settings = config.settings()
    cache = CalibrationCache(config.calibration_cache) if config.calibration_cache else None
    records = run_mitigation_sweep(config.deltas, config.p_values, config.device,
                                   config.nominal, settings, cache=cache)
    meta = {"points": [_record_meta(r) for r in records]}
    return _MITIGATION_HEADER, _mitigation_rows(records), meta, sum(r.skipped for r in records)


def _run_mitigate_point(config: RunConfig):
    settings = config.settings()
    cache_path = config.calibration_cache
    task = (config.device, config.deltas[0], config.p_values, config.nominal,
            settings, _point_seed(config.seed, 0), cache_path)
    records, fresh = _mitigation_point(task)
    if cache_path:
        cache = CalibrationCache(cache_path)
        from .calibration import CalibratedGate
        for data in fresh:
            cache.put(CalibratedGate.from_dict(data), config.layout)
        cache.save()
    meta = {"points": [_record_meta(r) for r in records]}
    return _MITIGATION_HEADER, _mitigation_rows(records), meta, sum(r.skipped for r in records)


_RUNNERS = {
    "calibrate": _run_calibrate,
    "zz-sweep": _run_zz_sweep,
    "leakage-sweep": _run_leakage,
    "mitigation-sweep": _run_mitigation,
    "mitigate-point": _run_mitigate_point,
}


def run(config: RunConfig) -> int:
    """Execute the configured experiment and write CSV + JSON outputs."""
    started = time.time()
    try:
        header, rows, extra, failures = _RUNNERS[config.experiment](config)
    except (HybridizationError, CalibrationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    stem = os.path.join(config.output, config.experiment.replace("-", "_"))
    metadata = {
        "experiment": config.experiment,
        "version": __version__,
        "seed": config.seed,
        "runtime_s": round(time.time() - started, 3),
        "config": config.raw,
        **extra,
    }
    try:
        _write_csv(stem + ".csv", header, rows)
        _write_atomic(stem + ".json", json.dumps(metadata, indent=1, sort_keys=True) + "\n")
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 3
    print(f"wrote {stem}.csv ({len(rows)} rows) and {stem}.json")
    if failures:
        print(f"{failures} point(s) flagged as failed", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="xtalk-sim",
        description="Microwave-crosstalk simulation and mitigation experiments",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="JSON config path or bundled name")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: config, env XTALK_SIM_WORKERS, or all cores)")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        if config.experiment != args.experiment:
            raise ConfigError(
                f"config is for '{config.experiment}', requested '{args.experiment}'")
        if args.out is not None:
            config = replace(config, output=args.out)
        workers = args.workers
        if workers is None and "XTALK_SIM_WORKERS" in os.environ:
            workers = int(os.environ["XTALK_SIM_WORKERS"])
        if workers is not None:
            config = replace(config, workers=workers)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
