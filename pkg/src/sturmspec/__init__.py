"""Spectral analysis of Sturm Hamiltonians with eventually periodic frequency.

The pipeline: continued-fraction frequencies -> nested band covering of the
spectrum via transfer-matrix traces -> coding subshift on block letters ->
thermodynamic pressure of the log band length -> the four spectral
characteristics and their large-coupling constants.
"""

from .frequency import FrequencySpec, Convergents, canonical_spec, convergents, value
from .symbolic import (Letter, PerronData, alphabet, admissible, block_alphabet,
                       incidence_matrix, auxiliary_matrix, quotient_matrix,
                       charpoly_identity, charpoly_int, perron, perron_value,
                       parry_measure, enumerate_words, count_words, embed_word,
                       word_str, parse_word, tree_word_str, parse_tree_word)
from .bands import (Band, BandTree, TransferContext, band_for_word,
                    length_bounds_audit, level_extremes, root_bands, trace)
from .thermo import (MeanCycleResult, PotentialSample, PressureAnalysis,
                     PressureCurve, analysis, birkhoff_weight, bowen_root,
                     clear_analysis_cache, mean_cycles, mean_cycles_bruteforce,
                     potential, potential_corridor, pressure, pressure_curve,
                     pressure_derivative, pressure_limits, weak_gibbs_distance)
from .characteristics import (AsymptoticConstants, Characteristics,
                              MultifractalPoint, PeriodicPath,
                              asymptotic_constants, canonical_rotation,
                              dos_mass, local_dimension_estimate,
                              local_dimension_slope, multifractal_spectrum,
                              sample_parry_paths, spectral_characteristics)
from .errors import (BudgetError, ConvergenceError, InvariantError,
                     PrecisionError, SturmSpecError, StructuralError)

__version__ = "0.1.0"
