"""Numerical defaults shared by every module and the command line.

Changing a value here changes it everywhere; the CLI echoes the relevant
entries into each result file.
"""

import math

# truncation
TAIL_TOLERANCE = 1e-12          # Poisson tail mass allowed beyond the cutoff
MIN_AUTO_CUTOFF = 12            # floor for automatically chosen cutoffs

# operator validation
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

# inequality / witness decisions
VIOLATION_TOL = 1e-9

# sinusoidal fits and quadrature
FIT_GRID_POINTS = 24
QUADRATURE_POINTS = 401

# closed-form removable singularities: use the limit below this alpha**2
SMALL_ALPHA_SQ = 1e-8

# optimisation
OPT_STARTS = 64
OPT_SEED = 42
OPT_XATOL = 1e-10
OPT_FATOL = 1e-10
OPT_MAXITER = 20000
ALPHA_BOX = (0.0, 1.5)
CHI_BOX = (0.0, math.pi / 2)
THETA_BOX = (-math.pi, math.pi)   # sampling box only; angles are periodic

# Fig. 4 style landscape
SWEEP_POINTS = 41
SWEEP_RANGE = (0.0, 1.2)
SWEEP_STARTS = 8

# separable-state sampling
SEPARABLE_SAMPLES = 200
SEPARABLE_DEGREE = 3

# amplitude table
AMPLITUDE_GRID = (0.01, 2.0, 0.01)

# environment variable read by the CLI for process-level parallelism
WORKERS_ENV = "FOCKBELL_WORKERS"


def as_dict():
    """Return the public defaults as a plain dict (for provenance headers)."""
    return {k: v for k, v in globals().items() if k.isupper()}
