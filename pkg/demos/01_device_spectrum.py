"""Device model walkthrough: dressed levels, residual couplings, coupler parking.

Builds the reference two-transmon-plus-coupler device, inspects its dressed
spectrum, and locates the coupler frequency that suppresses the residual ZZ
interaction -- once inside the straddling regime (zero crossing) and once
outside it (|zeta| minimum only).
"""

from dataclasses import replace

import numpy as np

from xtalk_sim import (
    TWO_PI,
    DeviceParams,
    ModeLayout,
    dressed_spectrum,
    find_zz_suppression_point,
    predict_error_scales,
    xy_coupling,
    zz_coupling,
)

layout = ModeLayout()  # 4 levels per mode, dimension 64


def make_device(omega1_ghz: float) -> DeviceParams:
    return DeviceParams.from_ghz(
        omega0=5.34, omega1=omega1_ghz, omega_c=6.4,
        eta0=-0.3, eta1=-0.3, eta_c=-0.1,
        g0c=0.07, g1c=0.07, g01=0.005,
    )


for omega1, regime in ((5.52, "straddling (|Delta| < |eta|)"),
                       (5.76, "beyond straddling")):
    params = make_device(omega1)
    top = max(params.omega0, params.omega1)
    point = find_zz_suppression_point(
        params, (top + TWO_PI * 0.4, top + TWO_PI * 2.2), layout)
    parked = replace(params, omega_c=point.omega_c)
    spec = dressed_spectrum(parked, layout)

    print(f"\n=== omega1/2pi = {omega1} GHz: {regime} ===")
    print(f"ZZ-suppression point: kind = {point.kind}")
    print(f"  omega_c/2pi = {point.omega_c / TWO_PI:.4f} GHz, "
          f"zeta/2pi = {point.zeta / TWO_PI * 1e6:.3f} kHz")
    print(f"  J/2pi at the point = {xy_coupling(parked) / TWO_PI * 1e3:.3f} MHz")
    print(f"dressed frequencies: Q0 {spec.omega01_q0 / TWO_PI:.6f} GHz "
          f"(bare {params.omega0 / TWO_PI}), Q1 {spec.omega01_q1 / TWO_PI:.6f} GHz")
    print(f"dressed 1->2: Q0 {spec.omega12_q0 / TWO_PI:.6f} GHz, "
          f"Q1 {spec.omega12_q1 / TWO_PI:.6f} GHz")

    # closed-form crosstalk error scales for a typical drive strength
    omega_drive = TWO_PI * 0.042  # ~ peak amplitude of a 12 ns sqrt(X) pulse
    delta = params.omega1 - params.omega0
    noisy = replace(parked, p0=0.1, p1=0.1)
    scales = predict_error_scales(noisy, omega_drive, omega_drive, delta,
                                  xy_coupling(parked))
    print(f"predicted scales at p = 0.1: stark shift Q1 = "
          f"{scales.stark1 / TWO_PI * 1e6:.2f} kHz, bit-flip Q1 = {scales.bitflip1:.2e}, "
          f"swap = {scales.swap:.2e}")

# zeta as a function of coupler frequency (the curve the search walks)
params = make_device(5.52)
top = max(params.omega0, params.omega1)
grid_ghz = np.linspace(top / TWO_PI + 0.4, top / TWO_PI + 2.2, 10)
zetas = [zz_coupling(replace(params, omega_c=TWO_PI * wc), layout) / TWO_PI * 1e3
         for wc in grid_ghz]
print("\nzeta/2pi (MHz) vs omega_c/2pi (GHz):")
for wc, z in zip(grid_ghz, zetas):
    bar = "#" * int(min(40, abs(z) * 200))
    print(f"  {wc:6.3f}  {z:+8.4f}  {bar}")
