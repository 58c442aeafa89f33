"""Average-consensus simulation for networks coupled by molecular diffusion."""

__version__ = "0.1.0"

from .kernel import (KernelEval, MediumParams, closed_form_oracle,
                     cumulative_response, green_eval)
from .matrix import (COLUMN_NORMALIZED, UNIFORM_S, ConcentrationMatrix,
                     IterationMatrix, build_x, normalize, rates_compact,
                     rates_uniform, sparsify)
from .network import (EffectiveRadiusReport, NetworkGeometry, compact_cluster,
                      distance_matrix, effective_radius, grid_network,
                      line_network, load_geometry, save_geometry,
                      wrapped_line_network)
from .sim import (ConsensusState, EpochSchedule, TrialEnsemble,
                  compact_one_shot, epoch_schedule, monte_carlo, run_epoch,
                  run_until)
from .spectral import (CovariancePrediction, SpectralSummary,
                       column_variance_series, eigendecompose_symmetric,
                       lambda2_power, markov_structure_check,
                       matrix_power_column_variance, predict_covariance)
