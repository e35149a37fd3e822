"""The rate ordering over SNR for EPR-4, and where it breaks.

Every rate is reported in bits per channel use. The table shows that
HOM <= FOM(0) <= UBM <= C and HOM-upper <= FOM(1) hold, while the HOM lower
bound (tail treated as noise) sits above the mismatched HOM rate once the
SNR is moderate.

Run: python3 demos/03_rate_chain.py
"""
import numpy as np

from chanshort import rate_report, standard_channel

LN2 = np.log(2)
cir0 = standard_channel("epr4")
print(f"{'snr':>4} {'C':>7} {'UBM':>7} {'FOM0':>7} {'FOM1':>7} {'HOM_U':>7} {'HOM_L':>7} {'HOM':>9}  violations")
for snr in range(0, 21, 4):
    r = rate_report(cir0.with_snr_db(snr), 1, snr_db=snr)
    cols = [r.c, r.i_ubm, r.i_fom0, r.i_fom1, r.i_hom_u, r.i_hom_l]
    print(f"{snr:4d} " + " ".join(f"{v / LN2:7.3f}" for v in cols)
          + f" {r.i_hom / LN2:9.3f}  {', '.join(r.violations()) or '-'}")
