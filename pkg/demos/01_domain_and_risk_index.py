"""Ship domains and the logistic risk index.

A vessel's domain is an off-center ellipse that grows with speed: the
boundary sits further ahead than abeam or astern. The scale factor f says
how much the domain must be inflated or shrunk to touch a given target
point, and the logistic risk index turns f into a number in (0, 1) with
0.5 exactly on the boundary.
"""

import numpy as np

from seamanship import (
    DomainParams,
    LocalPoint,
    VesselState,
    ddv,
    make_domain,
    risk_index,
    scale_factor,
)

KNOTS = 1852.0 / 3600.0

state = VesselState(time=0.0, north=0.0, east=0.0, speed=10.0 * KNOTS,
                    heading=0.0, length=100.0)
domain = make_domain(state, DomainParams())
print("vessel: 100 m hull, 10 kn, heading north")
print(f"domain: semi-major {domain.semi_major:.0f} m, "
      f"semi-minor {domain.semi_minor:.0f} m, "
      f"center {domain.center_offset_fwd:.0f} m ahead of the vessel\n")

own = state.position
print(f"{'brg deg':>8} {'range m':>8} {'f':>7} {'risk':>7} {'ddv':>6}")
for bearing_deg in (0, 45, 90, 180):
    for rng_m in (200.0, 600.0, 1200.0, 2400.0):
        b = np.radians(bearing_deg)
        target = LocalPoint(rng_m * np.cos(b), rng_m * np.sin(b))
        f = scale_factor(domain, target, own)
        print(f"{bearing_deg:>8} {rng_m:>8.0f} {f:>7.3f} "
              f"{risk_index(f):>7.4f} {ddv(f):>6.3f}")
    print()

print("The same range is safer abeam than dead ahead: the domain reaches")
print("further forward, so head-on targets cross f = 1 much earlier.")
