"""CHSH with intensity rates versus the intensity-based version.

The intensity CHSH exceeds 2 for small oscillator amplitudes, which is an
artefact of the normalisation.  With rates the correlation amplitude never
gets large enough to cross the classical bound.
"""

import math

import numpy as np

from fockbell import (OPTIMAL_CHSH_ANGLES, amplitude_AR, amplitude_AT, chsh_rates_value,
                      chsh_twc_value)

# %% amplitudes of the two correlators
alphas = np.array([0.2, 0.5, 0.64, 0.8, 1.0, 1.5])
print(" alpha   alpha^2   A_T      A_R")
for a in alphas:
    print(f"{a:6.2f} {a*a:8.4f} {amplitude_AT(a):8.5f} {amplitude_AR(a):8.5f}")
print("violation needs an amplitude above", round(1 / math.sqrt(2), 5))

# %% the two CHSH values at the optimal angles, from the Fock simulation
for a in (0.3, 0.6, 0.7, 1.0):
    twc = chsh_twc_value(a, *OPTIMAL_CHSH_ANGLES).value
    rates = chsh_rates_value(a, *OPTIMAL_CHSH_ANGLES).value
    print(f"alpha^2 = {a*a:.3f}: intensity CHSH {twc:.5f}, rate CHSH {rates:.5f}")

# %% best rate amplitude over a dense grid
grid = np.linspace(0.01, 3.0, 300)
best = max(2 * math.sqrt(2) * amplitude_AR(a) for a in grid)
print(f"largest rate CHSH on the grid: {best:.5f}")
