"""Phase-averaged classical model and the effective single-mode POVM.

Averaging a classical field model over a random oscillator phase gives a
smaller correlation amplitude than the quantum rate amplitude.  The POVM
elements reproduce four-mode expectations with a single-mode operator.
"""

import numpy as np

from fockbell import (HARDY_OPTIMUM, amplitude_AR, phase_averaged_amplitude, povm_rate,
                      verify_povm_equivalence)

# %% classical against quantum amplitudes
for a in (0.05, 0.5, 1.0, 1.5):
    print(f"alpha = {a}: A_R^C = {phase_averaged_amplitude(a):.5f}, A_R = {amplitude_AR(a):.5f}")

# %% the POVM for one setting
m = povm_rate(HARDY_OPTIMUM[1]).matrix
print("POVM on the signal mode (cutoff 1):", np.round(m, 5))
print( "eigenvalues in [0, 1]:",
      bool(np.all((np.linalg.eigvalsh(m) > -1e-12) & (np.linalg.eigvalsh(m) < 1 + 1e-12))))

# %% equivalence checks
for scenario in ("homodyne", "rate"):
    kw = {"alpha": 0.5} if scenario == "homodyne" else {"settings": HARDY_OPTIMUM}
    rep = verify_povm_equivalence(scenario, **kw)
    print(f"{scenario}: max deviation {rep.max_deviation:.2e}")
