"""Walk through the interferometer state on a truncated Fock space.

A single photon split on a beamsplitter and mixed with two coherent
oscillators gives the four-mode state |Psi(alpha)>.  We build it, check its
norm and photon statistics, and look at the measured modes.
"""

import math

import numpy as np

from fockbell import (BeamsplitterParams, auto_cutoff, expectation, measured_state,
                      number_operator, psi_state)

# %% cutoff chosen by the Poisson tail rule
for alpha in (0.5, 1.0, 2.0):
    print(f"alpha = {alpha}: auto cutoff {auto_cutoff(alpha)}")

# %% the state and its mean photon numbers
alpha = 0.8
psi = psi_state(alpha)
print("modes:", psi.layout.names, "dimension:", psi.layout.dim)
print("norm:", np.linalg.norm(psi.amplitudes))
for mode in psi.layout.names:
    n = expectation(psi, number_operator(psi.layout, mode)).real
    print(f"<n_{mode}> = {n:.6f}")
print("expected: oscillators alpha^2 =", alpha**2, "and half a photon in each b mode")

# %% after the two homodyne beamsplitters
out = measured_state(psi, BeamsplitterParams(math.pi / 4, 0.3), BeamsplitterParams(math.pi / 4, 0.0))
# the padded output space is large, so count photons from the probability tensor
prob = np.abs(out.tensor) ** 2
total = sum((prob.sum(axis=tuple(j for j in range(prob.ndim) if j != k)) * np.arange(prob.shape[k])).sum()
            for k in range(prob.ndim))
print("measured modes:", out.layout.names, "total photons:", round(total, 10),
      "(2 alpha^2 + 1 =", 2 * alpha**2 + 1, ")")
