# # The two-photon dip
#
# Two photons from one pair meet on a 50:50 beamsplitter. When their paths are
# matched in time they leave together, so the coincidence probability drops to
# zero. This script computes that probability three independent ways.

import numpy as np

from rotating_hom import physics

# A Gaussian source 150 Trad/s wide centred near 710 nm.

width = 1.5e14
center = 2 * np.pi * physics.SPEED_OF_LIGHT / 710e-9
psi = physics.SeparableGaussian(center, width)

# Direct two-dimensional quadrature of the exchange overlap, the closed form,
# and a brute-force mode calculation on a 128 x 128 frequency grid.

grid = psi.tabulate(bins=128)
print(f"{'sigma*T':>8} {'quadrature':>12} {'closed form':>12} {'modes':>12}")
for sT in np.linspace(0, 3, 7):
    T = sT / width
    p_quad = physics.coincidence_probability(psi, T)
    p_closed = physics.gaussian_dip(T, width)
    p_modes = physics.coincidence_probability_discrete_oracle(grid, T)
    print(f"{sT:8.2f} {p_quad:12.9f} {p_closed:12.9f} {p_modes:12.9f}")

# Antisymmetrising the pair flips the sign of the overlap: the photons now
# always split, so the dip turns into a peak of height one.

anti = physics.two_color_pair(center, center + 5 * width, width, antisymmetric=True, bins=96)
print("antisymmetric pair at T = 0:", physics.coincidence_probability(anti, 0.0))

# On the translation stage the dip is a Gaussian in position. Its width follows
# from the spectral width and the group index of the fibre.

print(f"dip width on the stage: {physics.dip_width_stage(width, 1.45) * 1e6:.3f} um")
