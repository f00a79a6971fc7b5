"""Entanglement witnesses for intensities and for rates.

Both witnesses are non-negative on product states.  On |Psi(alpha)> they
turn negative below a threshold in alpha^2; the rate witness keeps working
up to a larger amplitude.
"""

import math

import numpy as np

from fockbell import evaluate_witness, psi_state, random_separable_state
from fockbell.witness import detection_threshold, witness_minimum

# %% thresholds from the closed amplitudes
for kind in ("intensities", "rates"):
    print(f"{kind:11s} detects entanglement for alpha^2 < {detection_threshold(kind):.4f}")

# %% Fock values on the entangled state
for x in (0.5, 1.2, 1.8):
    a = math.sqrt(x)
    w_i = witness_minimum("intensities", a).witness_value
    w_r = witness_minimum("rates", a).witness_value
    print(f"alpha^2 = {x}: intensities {w_i: .5f}, rates {w_r: .5f}")

# %% random product states never go negative
rng = np.random.default_rng(1)
worst = min(evaluate_witness(random_separable_state(seed=s), k, *rng.uniform(-math.pi, math.pi, 2)).witness_value
            for s in range(30) for k in ("intensities", "rates"))
print(f"smallest witness over 30 product states: {worst:.4f}")
print("entangled example at alpha^2 = 0.5:",
      evaluate_witness(psi_state(math.sqrt(0.5)), "rates", math.pi / 4, 0.0).detects_entanglement)
