"""The CH inequality for rates is violated when the parties vary their oscillators.

The Hardy-like pattern switches the oscillator off for one setting on each
side.  A multistart Nelder-Mead search then finds CH values below -1.
Forcing equal amplitudes everywhere removes the violation.
"""

from fockbell.search import PARAMS
from fockbell import (HARDY_OPTIMUM, OptimizerConfig, ch_rates_value, equal_amplitude_space,
                      hardy_space, optimize_ch)

# %% the quoted optimum
ev = ch_rates_value(HARDY_OPTIMUM)
print(f"CH at the Hardy settings: {ev.ch_value:.7f}")

# %% search in the Hardy pattern (a few starts keep the demo quick)
res = optimize_ch(hardy_space(), OptimizerConfig(starts=16))
print(f"optimised CH: {res.value:.7f}")
for name, value in zip(PARAMS, res.params):
    print(f"  {name:7s} {value: .5f}")

# %% same amplitude for all four settings
eq = optimize_ch(equal_amplitude_space(), OptimizerConfig(starts=16))
print(f"equal-amplitude optimum: {eq.value:.9f} (never below -1)")
