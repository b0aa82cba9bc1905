"""Leakage vs detuning: why the qubit-qubit detuning must avoid |eta|.

Runs a coarse version of the leakage experiment: both qubits get two
back-to-back sqrt(X) pulses while the neighbor's drive bleeds in with
strength p = 0.1, starting from the dressed |101> state.  The leakage into
Q1's second excited state peaks where the cross tone hits the 1->2
transition, i.e. at a detuning equal to |eta1|.

A coarse grid keeps this demo at a few minutes; the harness config
`paper_fig1c.json` runs the full-resolution version.
"""

import time

from xtalk_sim import TWO_PI, DeviceParams, ModeLayout
from xtalk_sim.mitigation import SweepSettings, run_leakage_sweep

base = DeviceParams.from_ghz(5.34, 5.36, 6.4, -0.3, -0.3, -0.1, 0.07, 0.07, 0.005,
                             p0=0.1, p1=0.1)
deltas = [TWO_PI * d for d in (0.06, 0.14, 0.22, 0.28, 0.32, 0.40, 0.52)]

start = time.perf_counter()
records = run_leakage_sweep(deltas, base, SweepSettings(workers=2, seed=7))
print(f"swept {len(records)} points in {time.perf_counter() - start:.0f} s\n")

print("Delta/2pi   P(|200>) Q0    P(|002>) Q1")
for rec in records:
    if rec.skipped:
        print(f"  {rec.delta_ghz:5.2f}    skipped ({';'.join(rec.flags)})")
        continue
    print(f"  {rec.delta_ghz:5.2f}    {rec.leak_q0_200:11.3e}   {rec.leak_q1_002:11.3e}"
          + ("   <-- near |eta1|" if abs(rec.delta_ghz - 0.3) < 0.05 else ""))
