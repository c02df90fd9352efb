# # Calibrating the loop with a laser
#
# A continuous-wave laser in the same loop gives a fringe shift proportional to
# the rotation rate. Its slope fixes the loop area independently of the photons.

import numpy as np

from rotating_hom import estimation, pipelines, scenarios

config = scenarios.lab_preset()
result = pipelines.calibrate_classical(config.with_overrides(seed=4))

for s in result.shifts:
    print(f"{s.magnitude:5.2f} Hz  {np.degrees(s.shift):8.2f} +- {np.degrees(s.std):.2f} deg")
print(f"slope {np.degrees(result.slope.slope):.2f} +- {np.degrees(result.slope.slope_std):.2f} deg/Hz")
print(f"model {np.degrees(result.model_slope):.2f} deg/Hz")

# The laser phase knows nothing about the glass, while the photon delay is slowed
# by the group index. The ratio of the two slopes recovers that index.

quantum = pipelines.simulate_rotation(config.with_overrides(seed=4))
n_g = estimation.ratio_analysis(quantum.slope.slope, result.slope.slope, config.classical.wavelength)
print(f"group index from the two slopes: {n_g:.3f}")
