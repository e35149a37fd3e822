"""Channel shorteners (FOM, UBM, HOM) and a reduced-state soft-output equalizer.

The package designs prefilter/target/feedback triples that maximize achievable
mutual-information bounds for a known ISI channel, equalizes with a delayed
soft-output Viterbi detector, and measures the resulting rates by simulation.
"""
from .channel import (ChannelError, Cir, MinPhaseError, MinPhaseResult, channel_from_dict,
                      channel_to_dict, load_channel, min_phase, n0_from_snr_db,
                      random_iid_channel, split_target, standard_channel)
from .design import (DesignError, FomFilters, HomFilters, SigmaChoice, TruncationWarning,
                     UbmFilters, design_hom, filters_from_dict, filters_to_dict, fom_gradient,
                     milb_general, optimal_b, optimal_w, optimize_fom, optimize_ubm,
                     select_sigma, sigma_floor, theorem1_rate, ubm_rate)
from .modulation import BPSK, PSK8, QAM16, QPSK, Modulation, ModulationName
from .montecarlo import (SimConfig, SimRow, delay_sweep, measured_mi, run, run_point,
                         sigma_experiment, transmit)
from .rates import RateReport, capacity, delta_mse, hom_bounds, rate_report, write_rates_csv
from .sove import LlrFrame, Metric, TrellisConfig, equalize
from .spectral import FrequencyGrid, TapVector, dtft_values, idtft_values

__version__ = "0.1.0"
