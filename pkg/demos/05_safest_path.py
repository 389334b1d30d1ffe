"""Searching for the least-risk maneuver sequence.

A crossing target approaches from starboard while a shallow bank sits a
few hundred meters to the east, so dodging starboard trades collision
risk for grounding risk. The planner expands a rudder/speed grid over a
fixed horizon, scores each candidate state at the level endpoints, and
keeps the path whose worst moment is best. That minimum is the
best-achievable scenario risk: the floor that scoring later compares
recorded behavior against.
"""

import math

import numpy as np

from seamanship import (
    Hyperparameters,
    KinodynamicParams,
    ObstacleSet,
    VesselType,
    branch_and_bound,
    exhaustive_search,
    step_kinodynamics,
)
from seamanship.geometry import VesselTrack
from seamanship.risk import scenario_risk_for_state


def straight(track_id, n0, e0, speed, heading, n_steps=181, dt=10.0):
    t = dt * np.arange(n_steps)
    return VesselTrack(
        track_id=track_id,
        times=t,
        north=n0 + speed * t * math.cos(heading),
        east=e0 + speed * t * math.sin(heading),
        speed=np.full(n_steps, speed),
        heading=np.full(n_steps, heading),
        length=100.0,
        vessel_type=VesselType.CARGO,
    )


def bank(e_near, e_far, n_lo, n_hi):
    return np.array([
        [n_lo, e_near], [n_hi, e_near], [n_hi, e_far], [n_lo, e_far], [n_lo, e_near],
    ], dtype=float)


# Own ship northbound; the crosser comes in from starboard and both
# reach (north 1200, east 0) at t = 240 s if nobody acts.
tracks = {
    "own": straight("own", 0.0, 0.0, 5.0, 0.0),
    "crosser": straight("crosser", 1200.0, 1200.0, 5.0, 1.5 * math.pi),
}
obstacles = ObstacleSet([bank(500.0, 800.0, -200.0, 2400.0)])

kin = KinodynamicParams(v_min=0.0, v_max=7.0)
hyper = Hyperparameters(n_t=2, n_alpha=9, n_v=3, horizon_T=240.0)

T0 = 120.0
result = branch_and_bound(tracks, "own", T0, hyper, kin, obstacles=obstacles)

# Do-nothing reference: rudder centered, speed held, scored at the same
# two level endpoints; the worst of those is what drifting on costs.
state = tracks["own"].state_at(T0)
dt = hyper.horizon_T / hyper.n_t
hold_risk = 0.0
for _ in range(hyper.n_t):
    state = step_kinodynamics(state, 0.0, state.speed, dt, kin)
    step = scenario_risk_for_state(state, state.time, [tracks["crosser"]], obstacles)
    hold_risk = max(hold_risk, step.scenario)

print("crossing from starboard, shallow bank to the east, 120 s warning")
print(f"holding course, worst moment over {hyper.horizon_T:.0f} s: {hold_risk:.4f}")
print(f"best achievable ({hyper.n_t} decisions): {result.sr_star:.6f}")
print(f"nodes expanded: {result.nodes_expanded}, "
      f"targets held past their data: {result.targets_held}\n")

print(f"best path (one decision per {dt:.0f} s level):")
print(f"{'t':>5} {'north':>7} {'east':>7} {'kn':>5} {'hdg deg':>8} {'risk':>9} "
      f"{'alpha':>6} {'v_cmd':>6}")
for node in result.states:
    hdg = math.degrees(node.heading) % 360.0
    alpha = "-" if node.alpha is None else f"{node.alpha:.2f}"
    v_cmd = "-" if node.v_cmd is None else f"{node.v_cmd:.1f}"
    print(f"{node.time:>5.0f} {node.state.north:>7.0f} {node.state.east:>7.0f} "
          f"{node.speed / 0.514444:>5.1f} {hdg:>8.1f} {node.scenario_risk:>9.6f} "
          f"{alpha:>6} {v_cmd:>6}")
print("\nHard port with a crash stop: away from the crosser and the bank.")

# The grid is small enough to enumerate every sequence and confirm the
# greedy search found the true minimum.
exact = exhaustive_search(tracks, "own", T0, hyper, kin, obstacles=obstacles)
print(f"exhaustive minimum over {exact.nodes_expanded} nodes: {exact.sr_star:.6f}")
print(f"greedy equals exhaustive: {abs(result.sr_star - exact.sr_star) < 1e-12}")

# The floor rises as action is delayed. At 150 s the first scoring
# point lands just after the would-be collision and no maneuver moves
# the ship far enough to matter.
print(f"\n{'start':>6} {'sr_star':>10}")
for t0 in (0.0, 60.0, 120.0, 150.0):
    r = branch_and_bound(tracks, "own", t0, hyper, kin, obstacles=obstacles)
    print(f"{t0:>6.0f} {r.sr_star:>10.6f}")

print("\nActing four minutes out makes the crossing free; at ninety seconds")
print("before impact the best the grid offers still carries real risk.")
