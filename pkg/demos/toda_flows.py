"""Integrating the t1 and tbar1 flows and recovering the 2D Toda equation.

Run:  python3 demos/toda_flows.py
"""
from toda2d.hierarchy import (FlowSpec, HamiltonianId, integrate, smooth_toda_data,
                              toda_equation_check, toda_initial_state)

data = smooth_toda_data(32)
state = toda_initial_state(*data)

traj = integrate([(FlowSpec("t", 1), 0.5, 1e-3), (FlowSpec("tbar", 1), 0.5, 1e-3)], state,
                 [HamiltonianId("t", 1), HamiltonianId("t", 2), HamiltonianId("tbar", 1)])
for h in traj.ledger:
    print(f"{h}: relative drift {traj.drift(h):.2e} over {len(traj.times) - 1} steps")

print("Toda residual as the step halves:")
prev = None
for step in (4e-3, 2e-3, 1e-3, 5e-4):
    c = toda_equation_check(*data[:2], step, *data[2:])
    ratio = "" if prev is None else f"  ratio {prev / c.mixed:.3f}"
    print(f"  step {step:g}: mixed {c.mixed:.3e}{ratio}")
    prev = c.mixed
