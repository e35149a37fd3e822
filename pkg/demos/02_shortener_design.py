"""Designing FOM, UBM and HOM shorteners for Proakis-C at memory nu = 1.

Run: python3 demos/02_shortener_design.py
"""
import warnings

import numpy as np

from chanshort import (TruncationWarning, capacity, design_hom, optimize_fom, optimize_ubm,
                       standard_channel)

cir = standard_channel("proakis_c").with_snr_db(15)
nu = 1
print(f"channel {cir.name}, N0 = {cir.n0:.4f}, capacity {capacity(cir):.4f} nats\n")

for sigma in (0.0, 0.5, 1.0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        fom = optimize_fom(cir, nu, sigma)
    print(f"FOM sigma={sigma:.1f}: bound {fom.milb:.4f} nats after {fom.iterations} iterations")
    print(f"   target f = {np.round(fom.f.taps, 4)}")
    print(f"   feedback b (delays {nu + 1}..{cir.length - 1}) = {np.round(fom.b.taps[nu + 1:], 4)}")
    print(f"   prefilter length {len(fom.w)}")
    # the bound climbs monotonically from the HOM starting point
    print(f"   history {np.round(fom.history, 5)}")

ubm = optimize_ubm(cir, nu)
print(f"\nUBM: bound {ubm.milb:.4f} nats, g = {np.round(ubm.g.taps, 4)}")
print(f"     stationarity mean(M(1+G)) = {ubm.stationarity:.10f} (optimum sits at -1)")

hom = design_hom(cir, nu)
print(f"\nHOM: h_f = {np.round(hom.h_f.taps, 4)}, tail h_b = {np.round(hom.h_b.taps[nu + 1:], 4)}")
