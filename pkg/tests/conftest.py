"""Shared fixtures: the reference device at one working point, calibrated once.

Calibration costs tens of seconds, so the parked device and its calibrated
sqrt(X) pair are session-scoped and shared by the calibration, mitigation and
acceptance tests.
"""

from dataclasses import replace

import pytest

from xtalk_sim import (
    TWO_PI,
    DeviceParams,
    ModeLayout,
    calibrate_sqrt_x,
    dressed_spectrum,
    find_zz_suppression_point,
)


def reference_device(omega1_ghz=5.52, eta_ghz=-0.3, p=0.0) -> DeviceParams:
    """The study's device: omega0/2pi = 5.34 GHz, g/2pi = 70 MHz to the coupler."""
    return DeviceParams.from_ghz(
        omega0=5.34, omega1=omega1_ghz, omega_c=6.4,
        eta0=eta_ghz, eta1=eta_ghz, eta_c=-0.1,
        g0c=0.07, g1c=0.07, g01=0.005, p0=p, p1=p,
    )


def park_coupler(params: DeviceParams, layout: ModeLayout) -> DeviceParams:
    top = max(params.omega0, params.omega1)
    point = find_zz_suppression_point(
        params, (top + TWO_PI * 0.4, top + TWO_PI * 2.2), layout)
    return replace(params, omega_c=point.omega_c)


@pytest.fixture(scope="session")
def layout():
    return ModeLayout()


@pytest.fixture(scope="session")
def parked_device(layout):
    """Reference device at Delta/2pi = 0.18 GHz with the coupler parked."""
    return park_coupler(reference_device(), layout)


@pytest.fixture(scope="session")
def parked_spectrum(parked_device, layout):
    return dressed_spectrum(parked_device, layout)


@pytest.fixture(scope="session")
def calibrated_pair(parked_device, layout, parked_spectrum):
    cal0 = calibrate_sqrt_x(0, parked_device, 12.0, layout, spectrum=parked_spectrum)
    cal1 = calibrate_sqrt_x(1, parked_device, 12.0, layout, spectrum=parked_spectrum)
    return cal0, cal1
