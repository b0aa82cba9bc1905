"""Time-dependent drive and crosstalk fields with virtual-Z phase tracking.

Each qubit has one drive line carrying raised-cosine DRAG pulses

    Ω_X(t) = A [1 − cos(2π τ / T_g)],   Ω_Y(t) = −(α/η) dΩ_X/dτ,

modulated on a carrier cos(ω_d t + φ) / sin(ω_d t + φ) with the absolute lab
time t.  Qubit l additionally feels p_l times the opposite line's signal with
an extra phase (classical microwave crosstalk), so the total field multiplying
(a_l† + a_l) is

    E_l(t) = s_l(t) + p_l s_{1−l}(t; +φ̃).

A virtual Z gate is a zero-duration increment of the line's phase
accumulator; every pulse appended afterwards carries the updated phase, and
the crosstalk copy inherits the source line's phase by construction.  Phases
are referenced to a frame synchronous with the dressed qubit frequency: a
pulse appended at time t0 with carrier detuned by δω̃ from that frame gets
its carrier phase reduced by δω̃·t0, so that equal accumulator values produce
the same rotation axis no matter where the pulse sits in the schedule (the
frame-tracking numerically-controlled-oscillator convention).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .device import DeviceParams
from .operators import MODE_Q0, MODE_Q1, ModeLayout, annihilation, embed

__all__ = [
    "PulseParams",
    "DriveSchedule",
    "drag_envelope",
    "line_field",
    "drive_fields",
    "drive_hamiltonian",
    "apply_virtual_z",
]


@dataclass(frozen=True)
class PulseParams:
    """One DRAG pulse: amplitude A (rad/ns), gate time (ns), DRAG coefficient,
    carrier frequency ω_d (rad/ns), its offset δω̃ from the dressed frequency,
    line phase (rad) and start time (ns)."""

    amplitude: float
    t_gate: float
    drag_coeff: float
    freq: float
    freq_offset: float = 0.0
    phase: float = 0.0
    t_start: float = 0.0

    def __post_init__(self):
        if self.t_gate <= 0:
            raise ValueError("gate time must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")

    @property
    def t_end(self) -> float:
        return self.t_start + self.t_gate


def drag_envelope(pulse: PulseParams, t, eta: float):
    """Quadrature envelopes (Ω_X, Ω_Y) at time(s) t for a qubit of anharmonicity eta.

    Outside the pulse window both components are zero.  Accepts scalars or
    arrays.
    """
    t = np.asarray(t, dtype=float)
    tau = t - pulse.t_start
    inside = (tau >= 0.0) & (tau <= pulse.t_gate)
    w = 2.0 * math.pi / pulse.t_gate
    omega_x = np.where(inside, pulse.amplitude * (1.0 - np.cos(w * tau)), 0.0)
    omega_y = np.where(
        inside, -(pulse.drag_coeff / eta) * pulse.amplitude * w * np.sin(w * tau), 0.0
    )
    if omega_x.ndim == 0:
        return float(omega_x), float(omega_y)
    return omega_x, omega_y


@dataclass(frozen=True)
class DriveSchedule:
    """Immutable per-line pulse lists plus virtual-Z phase accumulators.

    ``frame_freqs`` holds the per-line phase-tracking frequencies (normally
    the dressed qubit frequencies); they define the frame in which the phase
    accumulator is interpreted.
    """

    pulses: tuple[tuple[PulseParams, ...], tuple[PulseParams, ...]] = ((), ())
    vz_phase: tuple[float, float] = (0.0, 0.0)
    frame_freqs: tuple[float, float] | None = None

    @property
    def duration(self) -> float:
        ends = [p.t_end for line in self.pulses for p in line]
        return max(ends) if ends else 0.0

    def line_end(self, qubit: int) -> float:
        line = self.pulses[qubit]
        return line[-1].t_end if line else 0.0

    def with_pulse(self, qubit: int, pulse: PulseParams,
                   t_start: float | None = None) -> "DriveSchedule":
        """Append a pulse on a line; its phase is the current accumulator,
        corrected for carrier-vs-frame slip at the start time."""
        if t_start is None:
            t_start = self.line_end(qubit)
        slip = 0.0
        if self.frame_freqs is not None:
            slip = (pulse.freq - self.frame_freqs[qubit]) * t_start
        placed = replace(pulse, t_start=t_start, phase=self.vz_phase[qubit] - slip)
        line = self.pulses[qubit]
        for other in line:
            if placed.t_start < other.t_end - 1e-12 and other.t_start < placed.t_end - 1e-12:
                raise ValueError(
                    f"pulse at t={placed.t_start} overlaps existing pulse on line {qubit}"
                )
        new_lines = list(self.pulses)
        new_lines[qubit] = tuple(sorted(line + (placed,), key=lambda p: p.t_start))
        return replace(self, pulses=tuple(new_lines))

    def with_virtual_z(self, qubit: int, angle: float) -> "DriveSchedule":
        acc = list(self.vz_phase)
        acc[qubit] += angle
        return replace(self, vz_phase=tuple(acc))


def apply_virtual_z(schedule: DriveSchedule, qubit: int, angle: float) -> DriveSchedule:
    """Zero-duration Z rotation: bump the line's phase accumulator by ``angle``."""
    return schedule.with_virtual_z(qubit, angle)


def line_field(schedule: DriveSchedule, qubit: int, t, eta: float, extra_phase: float = 0.0):
    """Scalar drive signal s_l(t) emitted by one line (rad/ns).

    ``extra_phase`` is added to every carrier, which is how the crosstalk copy
    picks up its additional phase.
    """
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for pulse in schedule.pulses[qubit]:
        ox, oy = drag_envelope(pulse, t, eta)
        carrier = pulse.freq * t + pulse.phase + extra_phase
        total = total + ox * np.cos(carrier) + oy * np.sin(carrier)
    if total.ndim == 0:
        return float(total)
    return total


def drive_fields(schedule: DriveSchedule, params: DeviceParams, t):
    """Total field (E_0, E_1) on each qubit: own drive plus crosstalk copy."""
    s0 = line_field(schedule, 0, t, params.eta0)
    s1 = line_field(schedule, 1, t, params.eta1)
    x0 = line_field(schedule, 1, t, params.eta1, extra_phase=params.xtalk_phase)
    x1 = line_field(schedule, 0, t, params.eta0, extra_phase=params.xtalk_phase)
    return s0 + params.p0 * x0, s1 + params.p1 * x1


def drive_hamiltonian(schedule: DriveSchedule, params: DeviceParams, t: float,
                      layout: ModeLayout) -> np.ndarray:
    """Drive-plus-crosstalk Hamiltonian E_0(t)(a0†+a0) + E_1(t)(a1†+a1)."""
    e0, e1 = drive_fields(schedule, params, t)
    a0 = annihilation(layout.levels[MODE_Q0])
    a1 = annihilation(layout.levels[MODE_Q1])
    x0 = embed(a0 + a0.conj().T, MODE_Q0, layout)
    x1 = embed(a1 + a1.conj().T, MODE_Q1, layout)
    return e0 * x0 + e1 * x1
