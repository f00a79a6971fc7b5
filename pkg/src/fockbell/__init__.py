"""Truncated Fock-space simulation of single-photon homodyne Bell tests.

The package builds the interferometer states on a truncated multimode Fock
space, evaluates rate and intensity correlators, the CHSH and CH
inequalities for rates, entanglement witnesses and effective single-mode
POVM elements.  Closed forms and brute-force Fock evaluations are kept
side by side so one can check the other.
"""

__version__ = "0.1.0"

from .fock import (CutoffError, FockOperator, FockVector, LayoutError, ModeLayout,
                   apply, auto_cutoff, coherent_state, expectation, ladder, number_operator,
                   tensor)
from .optics import (BeamsplitterParams, InitialStateParams, Setting, beamsplitter_unitary,
                     measured_state, prepare_state, propagate, psi_state, source_state)
from .observables import (amplitude_AR, amplitude_AT, intensity_correlator_ET,
                          phase_averaged_amplitude, rate_correlator_ER, rate_operator)
from .inequalities import (HARDY_OPTIMUM, OPTIMAL_CHSH_ANGLES, CHEvaluation, InequalityReport,
                           ch_alternative_form_value, ch_correlator_K_closed, ch_local_S_closed,
                           ch_rates_value, chsh_rates_value, chsh_twc_value)
from .search import (OptimizerConfig, SearchSpace, equal_amplitude_space, hardy_space,
                     landscape_cell_space, optimize_ch, point_space, sweep_alpha_landscape)
from .witness import (WitnessReport, evaluate_witness, random_separable_state,
                      witness_intensities, witness_rates)
from .povm import povm_homodyne, povm_rate, verify_povm_equivalence

__all__ = [name for name in dir() if not name.startswith("_")]
