"""One-bit UWB radar toolkit: threshold-sampled signed measurements,
sinusoidal interference estimation by majorize-minimize / ADMM solvers,
model-order selection, and sparse echo recovery."""

from .baseline import digital_integration
from .bic import BicScore, bic_score, fim_limit_check, fit_scale_only, select_order, xi
from .echo_recovery import (ErConfig, ErResult, ScaleUnidentifiableError,
                            recover_echo, soft_threshold)
from .freq_init import FiConfig, FiResult, GridDictionary, fast_freq_init
from .likelihood import (ScaledParams, f_prime, log_Phi, majorizer_aux,
                         neg_log_likelihood)
from .mmrelax import MmConfig, MmState, MmrelaxResult, mm_solve_k, mmrelax_full
from .obm1 import Obm1FormatError, read_obm1, write_obm1
from .pipeline import (ConfigError, ExperimentConfig, RunReport, build_scenario,
                       load_measured_rfi, parse_config, run_pipeline, run_sweep)
from .relax import (NoSpectralPeakError, SinusoidComponent, coarse_peak,
                    fit_amp_phase, periodogram_cost, refine_peak, relax_multi_pri)
from .signal_model import (Dictionary, Pulse, RfiParams, Scenario, SignedMatrix,
                           ThresholdMatrix, build_dictionary, inr, make_pulse,
                           nre, sign_sample, simulate_table5_rfi, sinr,
                           synthesize_rfi)

__version__ = "0.1.0"
