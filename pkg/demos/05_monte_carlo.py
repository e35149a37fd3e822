"""Measured mutual information: FOM(sigma=1) against UBM on Proakis-C.

A reduced version of the crossover experiment: UBM leads at low rates and
FOM with full feedback leads once the normalized MI is high. In between, the
sigma=1 design assumes error-free feedback that the detector does not have;
its LLRs turn overconfident and the measured MI can even be negative.

Run: python3 demos/05_monte_carlo.py   (a few seconds)
"""
import warnings

from chanshort import SimConfig, TruncationWarning, run_point, standard_channel

cir = standard_channel("proakis_c")
print(f"{'snr':>4} {'FOM(1) MI':>10} {'UBM MI':>8}   (16QAM, nu=1, normalized to 1)")
for snr in (10, 16, 22, 28, 34):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        fom = run_point(SimConfig(cir, "16qam", "fom", 1.0, 1, n_blocks=10), snr)
    ubm = run_point(SimConfig(cir, "16qam", "ubm", 1.0, 1, n_blocks=10), snr)
    print(f"{snr:4d} {fom.mi_norm:10.3f} {ubm.mi_norm:8.3f}")
