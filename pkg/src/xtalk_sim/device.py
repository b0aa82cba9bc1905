"""Static model of two transmons coupled through a frequency-tunable coupler.

Internally every frequency is angular and expressed in rad/ns, which equals
2π × (frequency in GHz) because 1 GHz · 1 ns = 1.  Configuration files and
reports use plain GHz; convert with :meth:`DeviceParams.from_ghz` and
:meth:`DeviceParams.to_ghz_dict`.

The static Hamiltonian is

    H = Σ_l (ω_l a_l†a_l + η_l/2 a_l†a_l†a_l a_l) + ω_c c†c + η_c/2 c†c†cc
        + Σ_l g_lc (a_l†c + c†a_l) + g01 (a0†a1 + a1†a0)

with l ∈ {0, 1} the qubits and c the coupler.  Dressed levels are labeled by
the bare state of maximum overlap; the residual two-qubit interactions are
summarized by the exchange strength J and the conditional shift
ζ = (E101 − E100) − (E001 − E000).
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import HybridizationError
from .operators import (
    MODE_C,
    MODE_Q0,
    MODE_Q1,
    ModeLayout,
    annihilation,
    embed,
    hermitian_eigensystem,
    number_op,
)

__all__ = [
    "TWO_PI",
    "DeviceParams",
    "DressedSpectrum",
    "ErrorScales",
    "SuppressionPoint",
    "build_static_hamiltonian",
    "dressed_spectrum",
    "zz_coupling",
    "xy_coupling",
    "find_zz_suppression_point",
    "predict_error_scales",
]

TWO_PI = 2.0 * math.pi

#: Labels whose dressed assignment is validated by default.
CORE_LABELS = (
    (0, 0, 0),
    (1, 0, 0),
    (0, 0, 1),
    (1, 0, 1),
    (0, 1, 0),
    (2, 0, 0),
    (0, 0, 2),
)


@dataclass(frozen=True)
class DeviceParams:
    """Static device frequencies, anharmonicities, couplings and crosstalk.

    All frequencies are angular (rad/ns).  ``p0``/``p1`` are the dimensionless
    crosstalk coefficients: qubit l feels p_l times the other line's drive.
    ``xtalk_phase`` is the extra phase picked up by the cross-coupled tone.
    """

    omega0: float
    omega1: float
    omega_c: float
    eta0: float
    eta1: float
    eta_c: float
    g0c: float
    g1c: float
    g01: float
    p0: float = 0.0
    p1: float = 0.0
    xtalk_phase: float = 0.0

    def __post_init__(self):
        for name in ("eta0", "eta1", "eta_c"):
            if getattr(self, name) >= 0:
                raise ValueError(f"{name} must be negative for transmon modes")
        for name in ("g0c", "g1c", "g01"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("p0", "p1"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")

    @classmethod
    def from_ghz(cls, omega0, omega1, omega_c, eta0, eta1, eta_c, g0c, g1c, g01,
                 p0=0.0, p1=0.0, xtalk_phase=0.0) -> "DeviceParams":
        """Build from linear frequencies in GHz (the reporting convention)."""
        return cls(
            omega0=TWO_PI * omega0, omega1=TWO_PI * omega1, omega_c=TWO_PI * omega_c,
            eta0=TWO_PI * eta0, eta1=TWO_PI * eta1, eta_c=TWO_PI * eta_c,
            g0c=TWO_PI * g0c, g1c=TWO_PI * g1c, g01=TWO_PI * g01,
            p0=p0, p1=p1, xtalk_phase=xtalk_phase,
        )

    def to_ghz_dict(self) -> dict:
        return {
            "omega0_ghz": self.omega0 / TWO_PI,
            "omega1_ghz": self.omega1 / TWO_PI,
            "omegac_ghz": self.omega_c / TWO_PI,
            "eta0_ghz": self.eta0 / TWO_PI,
            "eta1_ghz": self.eta1 / TWO_PI,
            "etac_ghz": self.eta_c / TWO_PI,
            "g0c_ghz": self.g0c / TWO_PI,
            "g1c_ghz": self.g1c / TWO_PI,
            "g01_ghz": self.g01 / TWO_PI,
            "p0": self.p0,
            "p1": self.p1,
            "xtalk_phase": self.xtalk_phase,
        }

    def qubit_frequency(self, qubit: int) -> float:
        return (self.omega0, self.omega1)[qubit]

    def anharmonicity(self, qubit: int) -> float:
        return (self.eta0, self.eta1)[qubit]

    def crosstalk(self, qubit: int) -> float:
        return (self.p0, self.p1)[qubit]

    def dispersive_ok(self) -> bool:
        """True when both qubit-coupler detunings exceed 5 g_lc."""
        return (abs(self.omega0 - self.omega_c) > 5 * self.g0c
                and abs(self.omega1 - self.omega_c) > 5 * self.g1c)

    def warn_if_not_dispersive(self):
        if not self.dispersive_ok():
            warnings.warn(
                "qubit-coupler detuning below 5 g: dispersive approximations degrade",
                stacklevel=2,
            )

    def cache_key(self, extra: tuple = ()) -> str:
        """Stable hash over the linear-GHz parameter values (plus extras)."""
        payload = {k: round(v, 12) for k, v in self.to_ghz_dict().items()}
        blob = json.dumps(payload, sort_keys=True) + repr(extra)
        return hashlib.sha1(blob.encode()).hexdigest()[:16]


def build_static_hamiltonian(params: DeviceParams, layout: ModeLayout) -> np.ndarray:
    """Dense static Hamiltonian in the bare |Q0 C Q1> basis (rad/ns)."""
    n0, nc, n1 = layout.levels
    freqs = (params.omega0, params.omega_c, params.omega1)
    etas = (params.eta0, params.eta_c, params.eta1)
    h = np.zeros((layout.dim, layout.dim), dtype=np.complex128)
    for mode, (w, eta) in enumerate(zip(freqs, etas)):
        nlev = layout.levels[mode]
        a = annihilation(nlev)
        nmat = number_op(nlev)
        kerr = a.conj().T @ a.conj().T @ a @ a
        h += w * embed(nmat, mode, layout) + 0.5 * eta * embed(kerr, mode, layout)
    a0 = embed(annihilation(n0), MODE_Q0, layout)
    ac = embed(annihilation(nc), MODE_C, layout)
    a1 = embed(annihilation(n1), MODE_Q1, layout)
    h += params.g0c * (a0.conj().T @ ac + ac.conj().T @ a0)
    h += params.g1c * (a1.conj().T @ ac + ac.conj().T @ a1)
    h += params.g01 * (a0.conj().T @ a1 + a1.conj().T @ a0)
    return h


@dataclass(frozen=True)
class DressedSpectrum:
    """Eigensystem of the static Hamiltonian with bare-state labels.

    ``energies``/``states`` hold the full ascending eigensystem; ``labels``
    maps a bare (Q0, C, Q1) label to its eigenvector index wherever the
    squared overlap exceeds 0.5 and the assignment is unambiguous.
    """

    layout: ModeLayout
    energies: np.ndarray
    states: np.ndarray
    labels: dict = field(repr=False)
    overlaps: dict = field(repr=False)

    def index(self, label: tuple[int, int, int]) -> int:
        try:
            return self.labels[tuple(label)]
        except KeyError:
            raise HybridizationError(label, self.overlaps.get(tuple(label))) from None

    def energy(self, label) -> float:
        return float(self.energies[self.index(label)])

    def state(self, label) -> np.ndarray:
        return self.states[:, self.index(label)]

    @property
    def omega01_q0(self) -> float:
        """Dressed Q0 transition frequency, E100 - E000."""
        return self.energy((1, 0, 0)) - self.energy((0, 0, 0))

    @property
    def omega01_q1(self) -> float:
        return self.energy((0, 0, 1)) - self.energy((0, 0, 0))

    @property
    def omega12_q0(self) -> float:
        """Dressed Q0 1->2 transition frequency, E200 - E100."""
        return self.energy((2, 0, 0)) - self.energy((1, 0, 0))

    @property
    def omega12_q1(self) -> float:
        return self.energy((0, 0, 2)) - self.energy((0, 0, 1))

    def qubit_frequency(self, qubit: int) -> float:
        return self.omega01_q0 if qubit == 0 else self.omega01_q1


def dressed_spectrum(params: DeviceParams, layout: ModeLayout,
                     required=CORE_LABELS) -> DressedSpectrum:
    """Diagonalize the device and label eigenvectors by maximum bare overlap.

    Each eigenvector claims the bare state it overlaps most; a label is kept
    only when the squared overlap exceeds 0.5 (which also makes the kept
    assignment a bijection).  Any label in ``required`` that cannot be kept
    raises :class:`HybridizationError` naming it.
    """
    h = build_static_hamiltonian(params, layout)
    energies, states = hermitian_eigensystem(h)
    weight = np.abs(states) ** 2  # weight[bare, eig]
    # pin each eigenvector's arbitrary global phase so that its dominant bare
    # component is real positive (the adiabatic-connection convention);
    # projections between labeled dressed states are meaningless otherwise
    dominant = np.argmax(weight, axis=0)
    anchors = states[dominant, np.arange(layout.dim)]
    states = states * np.where(np.abs(anchors) > 0, np.conj(anchors) / np.abs(anchors), 1.0)
    labels: dict = {}
    overlaps: dict = {}
    claimed_best: dict = {}
    for j in range(layout.dim):
        b = int(np.argmax(weight[:, j]))
        ov = float(weight[b, j])
        lab = layout.label(b)
        prev = overlaps.get(lab, -1.0)
        if ov > prev:
            overlaps[lab] = ov
        if ov > 0.5:
            # overlap > 0.5 means no other eigenvector can claim the same bare
            # state, so first-come assignment is safe
            labels[lab] = j
            claimed_best[lab] = ov
    spectrum = DressedSpectrum(layout=layout, energies=energies, states=states,
                               labels=labels, overlaps=overlaps)
    for lab in required:
        if tuple(lab) not in labels:
            raise HybridizationError(lab, overlaps.get(tuple(lab)))
    return spectrum


def zz_coupling(params: DeviceParams, layout: ModeLayout,
                spectrum: DressedSpectrum | None = None) -> float:
    """Conditional shift ζ = (E101 − E100) − (E001 − E000), in rad/ns."""
    if spectrum is None:
        spectrum = dressed_spectrum(
            params, layout,
            required=((0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1)),
        )
    return (spectrum.energy((1, 0, 1)) - spectrum.energy((1, 0, 0))
            - spectrum.energy((0, 0, 1)) + spectrum.energy((0, 0, 0)))


def xy_coupling(params: DeviceParams) -> float:
    """Approximate exchange strength J = g01 + g0c g1c / Δ12.

    1/Δ12 averages the two qubit-coupler detunings Δ_l = ω_l − ω_c.  With the
    coupler decoupled (g_lc = 0) this reduces to the direct coupling g01.
    """
    d1 = params.omega0 - params.omega_c
    d2 = params.omega1 - params.omega_c
    if d1 == 0.0 or d2 == 0.0:
        raise ZeroDivisionError("qubit-coupler detuning is zero; J diverges")
    inv_d12 = 0.5 * (1.0 / d1 + 1.0 / d2)
    return params.g01 + params.g0c * params.g1c * inv_d12


@dataclass(frozen=True)
class SuppressionPoint:
    """Coupler frequency that suppresses the residual ZZ interaction."""

    omega_c: float
    zeta: float
    kind: str  # "zero-crossing" | "minimum"


def find_zz_suppression_point(params: DeviceParams, omega_c_range: tuple[float, float],
                              layout: ModeLayout, points: int = 61,
                              zero_tol: float = TWO_PI * 1e-6) -> SuppressionPoint:
    """Locate the ZZ-suppression point of ζ(ω_c) on a coupler-frequency interval.

    A coarse grid (>= 50 points) is scanned first.  If ζ changes sign the
    bracket is bisected until |ζ| < ``zero_tol`` (default 2π·1 kHz) and the
    point is reported as a zero crossing; otherwise the |ζ| minimum is refined
    by golden-section search.  When several brackets exist the most dispersive
    one (largest ω_c) is used.
    """
    if points < 50:
        raise ValueError("suppression search needs at least 50 grid points")
    lo, hi = omega_c_range
    if not hi > lo:
        raise ValueError("empty coupler range")

    def zeta_at(wc: float) -> float:
        p = replace(params, omega_c=wc)
        try:
            return zz_coupling(p, layout)
        except HybridizationError as err:
            raise HybridizationError(
                err.label, err.overlap,
                detail=f"while scanning coupler at {wc / TWO_PI:.6f} GHz",
            ) from None

    grid = np.linspace(lo, hi, points)
    zetas = np.array([zeta_at(w) for w in grid])

    if np.max(np.abs(zetas)) < zero_tol:
        # degenerate: ZZ vanishes identically (e.g. all couplings zero)
        mid = 0.5 * (lo + hi)
        return SuppressionPoint(omega_c=mid, zeta=zeta_at(mid), kind="zero-crossing")

    sign_change = np.nonzero(np.sign(zetas[:-1]) * np.sign(zetas[1:]) < 0)[0]
    if sign_change.size:
        i = int(sign_change[-1])  # most dispersive bracket
        a, b = grid[i], grid[i + 1]
        fa = zetas[i]
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = zeta_at(m)
            if abs(fm) < zero_tol:
                return SuppressionPoint(omega_c=m, zeta=fm, kind="zero-crossing")
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b = m
        m = 0.5 * (a + b)
        return SuppressionPoint(omega_c=m, zeta=zeta_at(m), kind="zero-crossing")

    i = int(np.argmin(np.abs(zetas)))
    if 0 < i < points - 1:
        res = minimize_scalar(lambda w: abs(zeta_at(w)), method="golden",
                              bracket=(grid[i - 1], grid[i], grid[i + 1]),
                              options={"xtol": 1e-10})
        wc = float(res.x)
    else:
        wc = float(grid[i])
    return SuppressionPoint(omega_c=wc, zeta=zeta_at(wc), kind="minimum")


@dataclass(frozen=True)
class ErrorScales:
    """Closed-form crosstalk error scales at a given working point.

    ``stark_l`` is the cross-drive induced frequency shift |p_l Ω_{d,1-l}|²/2Δ
    (rad/ns); ``bitflip_l`` and ``swap`` are the dimensionless off-resonant
    transition scales.
    """

    stark0: float
    stark1: float
    bitflip0: float
    bitflip1: float
    swap: float


def predict_error_scales(params: DeviceParams, omega_d0: float, omega_d1: float,
                         delta: float, j: float) -> ErrorScales:
    """Evaluate the analytic crosstalk error scales.

    Parameters are the two drive amplitudes (rad/ns), the qubit-qubit detuning
    Δ and the exchange strength J.  Δ must be nonzero.
    """
    if delta == 0.0:
        raise ZeroDivisionError("detuning is zero; closed-form scales diverge")
    cross0 = params.p0 * omega_d1  # tone felt by Q0
    cross1 = params.p1 * omega_d0
    return ErrorScales(
        stark0=abs(cross0) ** 2 / (2.0 * delta),
        stark1=abs(cross1) ** 2 / (2.0 * delta),
        bitflip0=cross0**2 / (cross0**2 + delta**2),
        bitflip1=cross1**2 / (cross1**2 + delta**2),
        swap=4.0 * j**2 / (4.0 * j**2 + delta**2),
    )
