"""Collision risk between two vessels over an encounter.

Two cargo ships approach head-on with a modest lateral offset. The mutual
risk looks along a prediction horizon for domain violations; the arena
index discounts targets that are still far away at the instant itself.
The product of the two is the overall collision risk.
"""

import math

import numpy as np

from seamanship import (
    RiskParams,
    VesselTrack,
    VesselType,
    find_tdv,
    mutual_collision_risk,
    overall_collision_risk,
)


def straight(track_id, n0, e0, speed, heading, n_steps=121, dt=10.0):
    t = dt * np.arange(n_steps)
    return VesselTrack(
        track_id=track_id,
        times=t,
        north=n0 + speed * t * math.cos(heading),
        east=e0 + speed * t * math.sin(heading),
        speed=np.full(n_steps, speed),
        heading=np.full(n_steps, heading),
        length=150.0,
        vessel_type=VesselType.CARGO,
    )


own = straight("own", 0.0, 0.0, 5.0, 0.0)
target = straight("target", 3000.0, 120.0, 5.0, math.pi)

tdv = find_tdv(own, target)
print(f"first domain violation (TDV): t = {tdv:.0f} s\n")

params = RiskParams()
print(f"{'t s':>5} {'gap m':>7} {'mutual':>7} {'overall':>8}")
for t in range(0, 601, 60):
    so, st = own.state_at(t), target.state_at(t)
    gap = math.hypot(so.north - st.north, so.east - st.east)
    mu = mutual_collision_risk(own, target, t, params=params)
    cr = overall_collision_risk(own, target, t, params=params)
    print(f"{t:>5} {gap:>7.0f} {mu:>7.4f} {cr:>8.4f}")

print("\nMutual risk saturates early: the horizon already sees the")
print("violation coming. Overall risk waits for the target to actually")
print("enter the arena, then follows the encounter through the pass.")
