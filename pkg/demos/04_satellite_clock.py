# # A gravitomagnetic clock in orbit
#
# Light sent both ways round a spinning Earth picks up a tiny arrival-time
# difference. Per revolution it is G J / (R c^4).

from rotating_hom import physics, scenarios

earth = scenarios.SatelliteScenario()
per_rev = scenarios.gravitomagnetic_delay(earth)
print(f"delay per revolution at {earth.orbital_radius / 1e3:.0f} km: {per_rev:.3e} s")

# A frequently quoted order of magnitude for this setup is 1e-16 s, which is
# well above the bare formula. The two differ by a prefactor.

print(f"quoted ~{scenarios.QUOTED_ORBITAL_DELAY:g} s is {scenarios.QUOTED_ORBITAL_DELAY / per_rev:.1f}x larger")

# Accumulating revolutions builds the delay up to something the dip can see.

target = 100e-9 / physics.SPEED_OF_LIGHT
print(f"revolutions for a 100 nm path difference: {scenarios.revolutions_needed(earth, target)}")
