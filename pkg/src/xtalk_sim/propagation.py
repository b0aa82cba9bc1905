"""Schrödinger propagation, dressed-frame transformation and projections.

The propagator is integrated in the lab frame with a fixed step of at most
2 ps (the ~5 GHz carriers must be resolved) using a fourth-order
commutator-free scheme; see :mod:`xtalk_sim._stepper`.  Gates are read out in
the rotating frame R(t) = exp(−i H_dressed t) defined by the full dressed
diagonal, in which zero-drive evolution is the identity, and projected onto
the dressed computational states |000>, |001>, |100>, |101> in (Q0 ⊗ Q1)
order with the coupler in its ground state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _stepper
from .device import DeviceParams, DressedSpectrum
from .drive import DriveSchedule, drive_fields
from .errors import AccuracyError
from .operators import MODE_Q0, MODE_Q1, ModeLayout, annihilation, embed

__all__ = [
    "MAX_STEP",
    "COMPUTATIONAL_LABELS",
    "PropagationResult",
    "propagate",
    "propagate_columns",
    "to_rotating_frame",
    "project_computational",
    "leakage_populations",
    "unitarity_defect",
    "run_schedule",
]

#: Largest admissible integrator step (ns); 2 ps resolves the GHz carriers.
MAX_STEP = 0.002

#: Dressed labels spanning the two-qubit computational space, ordered
#: (|00>, |01>, |10>, |11>) in the Q0 ⊗ Q1 convention.
COMPUTATIONAL_LABELS = ((0, 0, 0), (0, 0, 1), (1, 0, 0), (1, 0, 1))

RICHARDSON_TOL = 1e-6
UNITARITY_TOL = 1e-8


def _split_system(h_static: np.ndarray, layout: ModeLayout):
    """Sparse pattern data for the kernel: bare diagonal, couplings, drive ops."""
    d = np.ascontiguousarray(np.real(np.diag(h_static)))
    g = h_static - np.diag(np.diag(h_static))
    a0 = annihilation(layout.levels[MODE_Q0])
    a1 = annihilation(layout.levels[MODE_Q1])
    x0 = embed(a0 + a0.conj().T, MODE_Q0, layout)
    x1 = embed(a1 + a1.conj().T, MODE_Q1, layout)
    pattern = (np.abs(g) + np.abs(x0) + np.abs(x1)) > 0.0
    rows, cols = np.nonzero(pattern)
    return (
        d,
        rows.astype(np.int64),
        cols.astype(np.int64),
        np.ascontiguousarray(np.real(g[rows, cols])),
        np.ascontiguousarray(np.real(x0[rows, cols])),
        np.ascontiguousarray(np.real(x1[rows, cols])),
    )


def _node_grid(t0: float, t1: float, step: float):
    nsteps = max(1, int(np.ceil((t1 - t0) / step - 1e-12)))
    h = (t1 - t0) / nsteps
    base = t0 + h * np.arange(nsteps)
    tnodes = np.empty(2 * nsteps)
    tnodes[0::2] = base + _stepper.NODE_C1 * h
    tnodes[1::2] = base + _stepper.NODE_C2 * h
    return tnodes, h, nsteps


def _integrate(h_static, schedule, params, layout, t0, t1, step, columns):
    """Lab-frame propagation of the given bare-basis columns."""
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    if step > MAX_STEP + 1e-15:
        raise ValueError(f"step {step} ns exceeds the {MAX_STEP} ns resolution bound")
    d, rows, cols, gv, x0v, x1v = _split_system(h_static, layout)
    tnodes, h, nsteps = _node_grid(t0, t1, step)
    e0, e1 = drive_fields(schedule, params, tnodes)
    e0 = np.ascontiguousarray(np.broadcast_to(e0, tnodes.shape), dtype=float)
    e1 = np.ascontiguousarray(np.broadcast_to(e1, tnodes.shape), dtype=float)
    # interaction picture at t0: Φ(t0) = e^{+iD t0} Ψ(t0)
    v = np.ascontiguousarray(columns * np.exp(1j * d * t0)[:, None])
    _stepper.cf4_apply(d, rows, cols, gv, x0v, x1v, e0, e1, t0, h, nsteps, v)
    return v * np.exp(-1j * d * t1)[:, None]


def propagate(h_static: np.ndarray, schedule: DriveSchedule, params: DeviceParams,
              layout: ModeLayout, t0: float, t1: float, step: float = MAX_STEP,
              verify_step: bool = True, richardson_tol: float = RICHARDSON_TOL) -> np.ndarray:
    """Full lab-frame propagator over [t0, t1].

    With ``verify_step`` the run is repeated at half the step and the two
    results must agree to ``richardson_tol`` in max-norm, otherwise an
    :class:`AccuracyError` is raised.  The returned propagator is checked to
    be unitary within 1e-8.
    """
    eye = np.eye(layout.dim, dtype=np.complex128)
    u = _integrate(h_static, schedule, params, layout, t0, t1, step, eye)
    if verify_step:
        u_half = _integrate(h_static, schedule, params, layout, t0, t1, step / 2.0, eye)
        diff = float(np.max(np.abs(u - u_half)))
        if diff > richardson_tol:
            raise AccuracyError(
                f"step {step} ns too coarse: halving changes the propagator by {diff:.3e}"
            )
    defect = unitarity_defect(u)
    if defect > UNITARITY_TOL:
        raise AccuracyError(f"propagator unitarity defect {defect:.3e} exceeds 1e-8")
    return u


def propagate_columns(h_static: np.ndarray, schedule: DriveSchedule, params: DeviceParams,
                      layout: ModeLayout, t0: float, t1: float, columns: np.ndarray,
                      step: float = MAX_STEP) -> np.ndarray:
    """Lab-frame evolution of selected state columns (dim, k).

    Same integrator as :func:`propagate`; used where only a few matrix
    elements of the propagator are needed (calibration and mitigation loops).
    """
    cols = np.asarray(columns, dtype=np.complex128)
    if cols.ndim == 1:
        cols = cols[:, None]
    return _integrate(h_static, schedule, params, layout, t0, t1, step, cols)


def unitarity_defect(u: np.ndarray) -> float:
    """max |U†U − 1|; for column blocks, the defect of column orthonormality."""
    k = u.shape[1]
    return float(np.max(np.abs(u.conj().T @ u - np.eye(k))))


def to_rotating_frame(u, spectrum: DressedSpectrum, duration: float) -> np.ndarray:
    """R(duration)† · U with R(t) = exp(−i H_dressed t).

    Works on the full propagator or on column blocks.  Zero-drive evolution
    maps to the identity in this frame.
    """
    phases = np.exp(1j * spectrum.energies * duration)
    r_dag = (spectrum.states * phases[None, :]) @ spectrum.states.conj().T
    return r_dag @ u


def project_computational(u_frame: np.ndarray, spectrum: DressedSpectrum) -> np.ndarray:
    """4×4 block of a frame propagator between dressed computational states."""
    w = np.column_stack([spectrum.state(lab) for lab in COMPUTATIONAL_LABELS])
    return w.conj().T @ u_frame @ w


def leakage_populations(u_frame: np.ndarray, spectrum: DressedSpectrum,
                        initial: tuple[int, int, int],
                        targets) -> dict[tuple[int, int, int], float]:
    """|<target|U|initial>|² for dressed labels, given the frame propagator."""
    psi = u_frame @ spectrum.state(initial)
    return {tuple(lab): float(np.abs(np.vdot(spectrum.state(lab), psi)) ** 2)
            for lab in targets}


@dataclass(frozen=True)
class PropagationResult:
    """Propagator bundle: lab frame, dressed rotating frame, 4×4 projection,
    and leakage populations for a chosen initial dressed state."""

    full: np.ndarray
    frame: np.ndarray
    gate: np.ndarray
    populations: dict

    def __post_init__(self):
        defect = unitarity_defect(self.full)
        if defect > UNITARITY_TOL:
            raise AccuracyError(f"propagator unitarity defect {defect:.3e} exceeds 1e-8")
        sv = np.linalg.svd(self.gate, compute_uv=False)
        if sv.max() > 1.0 + 1e-8:
            raise AccuracyError(f"projected gate has singular value {sv.max():.12f} > 1")
        if self.populations:
            total = sum(self.populations.values())
            if abs(total - 1.0) > 1e-8:
                raise AccuracyError(f"populations sum to {total:.10f}, not 1")


def run_schedule(h_static: np.ndarray, schedule: DriveSchedule, params: DeviceParams,
                 layout: ModeLayout, spectrum: DressedSpectrum, step: float = MAX_STEP,
                 initial: tuple[int, int, int] | None = None,
                 verify_step: bool = False) -> PropagationResult:
    """Propagate a schedule from t = 0 and assemble the full result bundle.

    When ``initial`` is given, the populations map contains every dressed
    label (they sum to one); callers typically read off the leakage entries.
    """
    duration = schedule.duration
    u = propagate(h_static, schedule, params, layout, 0.0, duration, step,
                  verify_step=verify_step)
    frame = to_rotating_frame(u, spectrum, duration)
    gate = project_computational(frame, spectrum)
    populations = {}
    if initial is not None:
        psi = frame @ spectrum.state(initial)
        amps = spectrum.states.conj().T @ psi
        populations = {spectrum.layout.label(i): float(np.abs(amps[i]) ** 2)
                       for i in range(spectrum.layout.dim)}
    return PropagationResult(full=u, frame=frame, gate=gate, populations=populations)
