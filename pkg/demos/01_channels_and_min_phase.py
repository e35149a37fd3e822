"""Test channels, their spectra and the minimum-phase equivalent.

Run: python3 demos/01_channels_and_min_phase.py
"""
import numpy as np

from chanshort import FrequencyGrid, dtft_values, min_phase, random_iid_channel, standard_channel

grid = FrequencyGrid(1024)
channels = [standard_channel("epr4"), standard_channel("proakis_c"), random_iid_channel(5, 0)]

for base in channels:
    cir = base.with_snr_db(10)
    H = np.abs(dtft_values(cir.h, grid))
    print(f"{cir.name:14s} taps {np.round(cir.taps, 3)}")
    print(f"{'':14s} |H| min {H.min():.2e} max {H.max():.3f}  (spectral nulls show as ~0)")

    mp = min_phase(cir)
    # the factor keeps |H| but moves the energy to the front taps
    ht = mp.h_tilde.taps * np.sqrt(cir.n0)
    print(f"{'':14s} min-phase taps {np.round(ht, 3)}")
    print(f"{'':14s} cumulative energy  original {np.round(np.cumsum(abs(cir.taps) ** 2), 3)}")
    print(f"{'':14s}                    min-phase {np.round(np.cumsum(abs(ht) ** 2), 3)}")
    print(f"{'':14s} all-pass prefilter: {len(mp.w_hom)} taps, deviation {mp.allpass_deviation:.1e}\n")
