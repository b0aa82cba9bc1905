"""Gate decomposition algebra, circuit realization, virtual-Z optimization."""

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xtalk_sim import (
    GateSpec,
    OptimizerConfig,
    build_simultaneous_circuit,
    gate_fidelity,
    optimize_virtual_z,
    simulate_circuit,
    u3_matrix,
)
from xtalk_sim.calibration import SQRT_X, single_qubit_fidelity
from xtalk_sim.errors import ConfigError

NOMINAL = (GateSpec.from_2pi(0.704, 0.277, 0.020),
           GateSpec.from_2pi(0.987, 0.790, 0.560))

angles = st.floats(min_value=-2 * math.pi, max_value=2 * math.pi,
                   allow_nan=False, allow_infinity=False)


def rz(a):
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def five_factor_oracle(theta, phi, lam):
    """Independent spelling of the decomposition for cross-checking."""
    from functools import reduce
    factors = [rz(phi - math.pi / 2), SQRT_X, rz(math.pi - theta), SQRT_X,
               rz(lam - math.pi / 2)]
    return reduce(np.matmul, factors)


def equal_up_to_phase(a, b, tol=1e-10):
    overlap = np.trace(a.conj().T @ b)
    if abs(overlap) < tol:
        return False
    return np.max(np.abs(a * overlap / abs(overlap) - b)) < tol


class TestU3Matrix:
    def test_matches_five_factor_product_on_1000_random_specs(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            theta, phi, lam = rng.uniform(-2 * math.pi, 2 * math.pi, size=3)
            got = u3_matrix(GateSpec(theta, phi, lam))
            assert np.max(np.abs(got - five_factor_oracle(theta, phi, lam))) < 1e-12

    @given(angles)
    @settings(max_examples=30, deadline=None)
    def test_inverse_phases_give_identity(self, alpha):
        u = u3_matrix(GateSpec(0.0, alpha, -alpha))
        assert equal_up_to_phase(u, np.eye(2, dtype=complex))

    def test_known_specs_against_oracle(self):
        # values are whatever the definitional product yields
        for spec in (GateSpec(math.pi / 2, -math.pi / 2, math.pi / 2),
                     GateSpec(math.pi, 0.0, math.pi)):
            assert np.max(np.abs(u3_matrix(spec)
                                 - five_factor_oracle(spec.theta, spec.phi, spec.lam))) < 1e-14

    def test_unitary(self):
        u = u3_matrix(NOMINAL[0])
        assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-14

    @given(angles, angles, angles, angles)
    @settings(max_examples=30, deadline=None)
    def test_trailing_z_absorbs_into_lambda(self, theta, phi, lam, alpha):
        left = u3_matrix(GateSpec(theta, phi, lam)) @ rz(alpha)
        right = u3_matrix(GateSpec(theta, phi, lam + alpha))
        assert equal_up_to_phase(left, right, tol=1e-9)

    def test_2pi_fraction_roundtrip(self):
        spec = GateSpec.from_2pi(0.704, 0.277, 0.020)
        assert spec.as_2pi() == pytest.approx((0.704, 0.277, 0.020))


class TestCircuitBuilder:
    def test_leading_virtual_z_zero_for_sqrt_x_spec(self, calibrated_pair,
                                                    parked_device, parked_spectrum):
        specs = (GateSpec(math.pi / 2, -math.pi / 2, math.pi / 2),) * 2
        schedule, trailing = build_simultaneous_circuit(
            specs, calibrated_pair, parked_device, parked_spectrum)
        for line in (0, 1):
            first = schedule.pulses[line][0]
            assert first.phase % (2 * math.pi) == pytest.approx(0.0, abs=1e-9)

    def test_layers_are_time_aligned(self, calibrated_pair, parked_device,
                                     parked_spectrum):
        schedule, _ = build_simultaneous_circuit(
            NOMINAL, calibrated_pair, parked_device, parked_spectrum)
        assert [p.t_start for p in schedule.pulses[0]] == [0.0, 12.0]
        assert [p.t_start for p in schedule.pulses[1]] == [0.0, 12.0]
        assert schedule.duration == 24.0

    def test_trailing_is_accumulated_phase(self, calibrated_pair, parked_device,
                                           parked_spectrum):
        _, trailing = build_simultaneous_circuit(
            NOMINAL, calibrated_pair, parked_device, parked_spectrum)
        for q in (0, 1):
            expected = NOMINAL[q].lam + NOMINAL[q].phi - NOMINAL[q].theta
            assert trailing[q] == pytest.approx(expected)

    def test_mismatched_gate_times_rejected(self, calibrated_pair, parked_device,
                                            parked_spectrum):
        cal0, cal1 = calibrated_pair
        stretched = replace(cal1, t_gate=24.0)
        with pytest.raises(ConfigError, match="gate time"):
            build_simultaneous_circuit(NOMINAL, (cal0, stretched), parked_device,
                                       parked_spectrum)


class TestSimulateCircuit:
    def test_zero_duration_is_identity(self, parked_device, parked_spectrum, layout):
        from xtalk_sim.drive import DriveSchedule
        gate, result = simulate_circuit(DriveSchedule(), (0.0, 0.0), parked_device,
                                        parked_spectrum, layout)
        assert np.allclose(gate, np.eye(4))
        assert np.allclose(result.full, np.eye(layout.dim))

    def test_two_pi_trailing_equals_none_up_to_phase(self, parked_device,
                                                     parked_spectrum, layout):
        from xtalk_sim.drive import DriveSchedule
        gate_a, _ = simulate_circuit(DriveSchedule(), (0.0, 0.0), parked_device,
                                     parked_spectrum, layout)
        gate_b, _ = simulate_circuit(DriveSchedule(), (2 * math.pi, 2 * math.pi),
                                     parked_device, parked_spectrum, layout)
        assert equal_up_to_phase(gate_a, gate_b)

    def test_ideal_circuit_factorizes_as_kron(self, calibrated_pair, parked_device,
                                              parked_spectrum, layout):
        schedule, trailing = build_simultaneous_circuit(
            NOMINAL, calibrated_pair, parked_device, parked_spectrum)
        gate, result = simulate_circuit(schedule, trailing, parked_device,
                                        parked_spectrum, layout)
        target = np.kron(u3_matrix(NOMINAL[0]), u3_matrix(NOMINAL[1]))
        assert gate_fidelity(target, gate) > 0.9998

    def test_crosstalk_degrades_fidelity(self, calibrated_pair, parked_device,
                                         parked_spectrum, layout):
        target = np.kron(u3_matrix(NOMINAL[0]), u3_matrix(NOMINAL[1]))
        noisy = replace(parked_device, p0=0.1, p1=0.1)
        fids = {}
        for name, dev in (("ideal", parked_device), ("crosstalk", noisy)):
            schedule, trailing = build_simultaneous_circuit(
                NOMINAL, calibrated_pair, dev, parked_spectrum)
            gate, _ = simulate_circuit(schedule, trailing, dev, parked_spectrum, layout)
            fids[name] = gate_fidelity(target, gate)
        assert fids["crosstalk"] < fids["ideal"]


class TestOptimizeVirtualZ:
    def test_without_crosstalk_nothing_to_correct(self, calibrated_pair, parked_device,
                                                  parked_spectrum, layout):
        # displacement tracks the calibrated pulses' coherent residue (~1e-3
        # rad here); the tighter spec-level bound lives in the acceptance
        # property suite
        result = optimize_virtual_z(
            NOMINAL, parked_device, calibrated_pair, parked_spectrum, layout,
            config=OptimizerConfig(max_evals=150, restarts=1, tol=1e-10,
                                   initial_step=(0.02,) * 6))
        assert result.fidelity_mitigated == pytest.approx(result.fidelity_ideal, abs=1e-6)
        for q in (0, 1):
            for got, nominal in zip(
                    (result.optimized[q].theta, result.optimized[q].phi,
                     result.optimized[q].lam),
                    (NOMINAL[q].theta, NOMINAL[q].phi, NOMINAL[q].lam)):
                assert abs(got - nominal) < 5e-3

    def test_mitigation_recovers_coherent_crosstalk_error(self, calibrated_pair,
                                                          parked_device,
                                                          parked_spectrum, layout):
        # deep-straddling point: crosstalk error is mostly coherent, so the
        # virtual-Z update must close most of the gap to the ideal fidelity
        noisy = replace(parked_device, p0=0.1, p1=0.1)
        result = optimize_virtual_z(
            NOMINAL, noisy, calibrated_pair, parked_spectrum, layout,
            config=OptimizerConfig(max_evals=400, restarts=1, tol=1e-10,
                                   initial_step=(0.05,) * 6))
        assert result.fidelity_mitigated >= result.fidelity_crosstalk - 1e-9
        gap_before = result.fidelity_ideal - result.fidelity_crosstalk
        gap_after = result.fidelity_ideal - result.fidelity_mitigated
        assert gap_after < 0.85 * gap_before
        assert result.evals > 0
