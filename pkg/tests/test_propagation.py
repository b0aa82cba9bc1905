"""Integrator accuracy, frame transformation, projection, leakage readout."""

from dataclasses import replace

import numpy as np
import pytest

from xtalk_sim import (
    TWO_PI,
    ModeLayout,
    build_static_hamiltonian,
    dressed_spectrum,
    leakage_populations,
    project_computational,
    propagate,
    propagate_columns,
    run_schedule,
    to_rotating_frame,
)
from xtalk_sim.drive import DriveSchedule, PulseParams
from xtalk_sim.errors import AccuracyError
from xtalk_sim.propagation import COMPUTATIONAL_LABELS, unitarity_defect

from conftest import reference_device

LAYOUT3 = ModeLayout((3, 3, 3))


def small_device(p=0.0):
    return reference_device(omega1_ghz=5.52, p=p)


def sqrt_x_like_pulse(freq, amplitude=np.pi / 24.0, start=0.0):
    return PulseParams(amplitude=amplitude, t_gate=12.0, drag_coeff=0.5,
                       freq=freq, t_start=start)


@pytest.fixture(scope="module")
def system3():
    params = small_device()
    h = build_static_hamiltonian(params, LAYOUT3)
    spectrum = dressed_spectrum(params, LAYOUT3)
    return params, h, spectrum


class TestPropagate:
    def test_zero_drive_matches_matrix_exponential(self, system3):
        params, h, _ = system3
        u = propagate(h, DriveSchedule(), params, LAYOUT3, 0.0, 10.0, verify_step=False)
        evals, evecs = np.linalg.eigh(h)
        exact = evecs @ np.diag(np.exp(-1j * evals * 10.0)) @ evecs.conj().T
        assert np.max(np.abs(u - exact)) < 1e-8

    def test_unitarity(self, system3):
        params, h, spectrum = system3
        sched = DriveSchedule().with_pulse(0, sqrt_x_like_pulse(spectrum.omega01_q0),
                                           t_start=0.0)
        u = propagate(h, sched, params, LAYOUT3, 0.0, 12.0, verify_step=False)
        assert unitarity_defect(u) < 1e-8

    def test_composition_split_at_midpoint(self, system3):
        params, h, spectrum = system3
        sched = DriveSchedule().with_pulse(0, sqrt_x_like_pulse(spectrum.omega01_q0),
                                           t_start=0.0)
        u_full = propagate(h, sched, params, LAYOUT3, 0.0, 12.0, verify_step=False)
        u_a = propagate(h, sched, params, LAYOUT3, 0.0, 7.0, verify_step=False)
        u_b = propagate(h, sched, params, LAYOUT3, 7.0, 12.0, verify_step=False)
        assert np.max(np.abs(u_b @ u_a - u_full)) < 1e-7

    def test_rejects_coarse_step(self, system3):
        params, h, _ = system3
        with pytest.raises(ValueError, match="step"):
            propagate(h, DriveSchedule(), params, LAYOUT3, 0.0, 1.0, step=0.01)

    def test_richardson_check_runs_and_can_fail(self, system3):
        params, h, spectrum = system3
        sched = DriveSchedule().with_pulse(0, sqrt_x_like_pulse(spectrum.omega01_q0),
                                           t_start=0.0)
        propagate(h, sched, params, LAYOUT3, 0.0, 12.0, verify_step=True)
        with pytest.raises(AccuracyError, match="too coarse"):
            propagate(h, sched, params, LAYOUT3, 0.0, 12.0, verify_step=True,
                      richardson_tol=1e-16)

    def test_fourth_order_convergence(self, system3):
        params, h, spectrum = system3
        sched = DriveSchedule().with_pulse(0, sqrt_x_like_pulse(spectrum.omega01_q0),
                                           t_start=0.0)
        us = [propagate(h, sched, params, LAYOUT3, 0.0, 12.0, step=s, verify_step=False)
              for s in (0.002, 0.001, 0.0005)]
        d1 = np.max(np.abs(us[0] - us[1]))
        d2 = np.max(np.abs(us[1] - us[2]))
        assert d2 > 0
        assert 10.0 < d1 / d2 < 25.0

    def test_columns_agree_with_full(self, system3):
        params, h, spectrum = system3
        sched = DriveSchedule().with_pulse(0, sqrt_x_like_pulse(spectrum.omega01_q0),
                                           t_start=0.0)
        u = propagate(h, sched, params, LAYOUT3, 0.0, 12.0, verify_step=False)
        cols_in = np.eye(LAYOUT3.dim, dtype=complex)[:, [0, 3, 9]]
        cols = propagate_columns(h, sched, params, LAYOUT3, 0.0, 12.0, cols_in)
        assert np.max(np.abs(cols - u[:, [0, 3, 9]])) < 1e-12


class TestRotatingFrame:
    def test_zero_drive_maps_to_identity(self, system3):
        params, h, spectrum = system3
        u = propagate(h, DriveSchedule(), params, LAYOUT3, 0.0, 24.0, verify_step=False)
        frame = to_rotating_frame(u, spectrum, 24.0)
        assert np.max(np.abs(frame - np.eye(LAYOUT3.dim))) < 1e-7

    def test_frame_transform_preserves_unitarity(self, system3):
        params, h, spectrum = system3
        sched = DriveSchedule().with_pulse(0, sqrt_x_like_pulse(spectrum.omega01_q0),
                                           t_start=0.0)
        u = propagate(h, sched, params, LAYOUT3, 0.0, 12.0, verify_step=False)
        frame = to_rotating_frame(u, spectrum, 12.0)
        assert unitarity_defect(frame) < 1e-8

    def test_uninvolved_top_level_keeps_population(self, system3):
        # a Q0 tone can resonantly connect any |0_Q0>-like level to its
        # |1_Q0> partner (so e.g. dressed |010> rotates); a level with Q0 at
        # the truncation top has no such partner and must stay put
        params, h, spectrum = system3
        sched = DriveSchedule().with_pulse(0, sqrt_x_like_pulse(spectrum.omega01_q0),
                                           t_start=0.0)
        u = propagate(h, sched, params, LAYOUT3, 0.0, 12.0, verify_step=False)
        frame = to_rotating_frame(u, spectrum, 12.0)
        idx = spectrum.index((2, 0, 0))  # top Q0 level at truncation 3
        diag = (spectrum.states[:, idx].conj() @ frame @ spectrum.states[:, idx])
        assert abs(diag) > 0.99


class TestProjection:
    def test_identity_projects_to_identity(self, system3):
        _, _, spectrum = system3
        gate = project_computational(np.eye(LAYOUT3.dim, dtype=complex), spectrum)
        assert np.max(np.abs(gate - np.eye(4))) < 1e-10

    def test_synthetic_x_on_q1_is_a_permutation(self, system3):
        # X on the Q1 dressed pair permutes |00>:|01> and |10>:|11|
        _, _, spectrum = system3
        w = spectrum.states
        swap = {(0, 0, 0): (0, 0, 1), (0, 0, 1): (0, 0, 0),
                (1, 0, 0): (1, 0, 1), (1, 0, 1): (1, 0, 0)}
        u = np.eye(LAYOUT3.dim, dtype=complex)
        for src, dst in swap.items():
            i, j = spectrum.index(src), spectrum.index(dst)
            u[:, [i, j]] = 0.0
            u[j, i] = 1.0
            u[i, j] = 1.0
        u_frame = w @ u @ w.conj().T
        gate = project_computational(u_frame, spectrum)
        expected = np.array([[0, 1, 0, 0], [1, 0, 0, 0],
                             [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        assert np.max(np.abs(gate - expected)) < 1e-10

    def test_strong_crosstalk_near_leakage_peak_is_subunitary(self):
        # p = 0.5 with the detuning at |eta1| floods Q1's |2> level
        layout = ModeLayout()
        params = reference_device(omega1_ghz=5.34 + 0.29, p=0.5)
        h = build_static_hamiltonian(params, layout)
        spectrum = dressed_spectrum(params, layout)
        sched = DriveSchedule()
        for q, freq in ((0, spectrum.omega01_q0), (1, spectrum.omega01_q1)):
            sched = sched.with_pulse(q, sqrt_x_like_pulse(freq), t_start=0.0)
        result = run_schedule(h, sched, params, layout, spectrum)
        sv = np.linalg.svd(result.gate, compute_uv=False)
        assert sv.min() < 1.0 - 1e-3


class TestLeakagePopulations:
    def test_zero_drive_no_leakage(self, system3):
        params, h, spectrum = system3
        u = propagate(h, DriveSchedule(), params, LAYOUT3, 0.0, 5.0, verify_step=False)
        frame = to_rotating_frame(u, spectrum, 5.0)
        pops = leakage_populations(frame, spectrum, (1, 0, 1), [(0, 0, 2), (2, 0, 0)])
        assert all(v < 1e-7 for v in pops.values())

    def test_run_schedule_populations_sum_to_one(self, system3):
        params, h, spectrum = system3
        sched = DriveSchedule().with_pulse(0, sqrt_x_like_pulse(spectrum.omega01_q0),
                                           t_start=0.0)
        result = run_schedule(h, sched, params, LAYOUT3, spectrum, initial=(1, 0, 1))
        assert sum(result.populations.values()) == pytest.approx(1.0, abs=1e-8)


class TestTruncationRobustness:
    def test_gate_stable_under_extra_level(self, parked_device, layout,
                                           parked_spectrum, calibrated_pair):
        cal0, cal1 = calibrated_pair
        params = replace(parked_device, p0=0.1, p1=0.1)
        layout5 = ModeLayout((5, 5, 5))
        spectrum5 = dressed_spectrum(params, layout5)
        gates = []
        for lay, spec in ((layout, parked_spectrum), (layout5, spectrum5)):
            h = build_static_hamiltonian(params, lay)
            sched = DriveSchedule(frame_freqs=(spec.omega01_q0, spec.omega01_q1))
            for layer in range(2):
                sched = sched.with_pulse(0, cal0.pulse, t_start=12.0 * layer)
                sched = sched.with_pulse(1, cal1.pulse, t_start=12.0 * layer)
            comp = np.column_stack([spec.state(lab) for lab in COMPUTATIONAL_LABELS])
            cols = propagate_columns(h, sched, params, lay, 0.0, 24.0, comp)
            cols = to_rotating_frame(cols, spec, 24.0)
            gates.append(comp.conj().T @ cols)
        assert np.max(np.abs(gates[0] - gates[1])) < 1e-5
