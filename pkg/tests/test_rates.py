import warnings

import numpy as np
import pytest

from chanshort.channel import Cir, random_iid_channel, standard_channel
from chanshort.design import design_hom
from chanshort.rates import (RATE_COLUMNS, capacity, corollary_check, delta_mse, hom_bounds,
                             rate_report, write_rates_csv)
from chanshort.spectral import FrequencyGrid, TapVector

GRID = FrequencyGrid(4096)
FLAT = Cir(TapVector([1.0]), 1.0, "flat")


def test_capacity_examples():
    assert capacity(FLAT, GRID) == pytest.approx(np.log(2))
    assert capacity(FLAT.with_n0(1e12), GRID) < 1e-11
    cir = standard_channel("epr4", 1.0)
    assert abs(capacity(cir, GRID) - capacity(cir, FrequencyGrid(40960))) < 1e-8


def test_delta_mse_examples():
    assert delta_mse(FLAT, GRID) == pytest.approx(0.5)
    assert delta_mse(Cir(TapVector([1.0, 0.5]), 1e-9), GRID) < 1e-8


def test_hom_bounds():
    h = design_hom(standard_channel("epr4", 0.1), 3)
    lo, hi = hom_bounds(h.h_f, h.h_b, GRID)
    assert lo == pytest.approx(hi)
    for nu in (0, 1, 2):
        h = design_hom(standard_channel("proakis_c", 0.01), nu)
        lo, hi = hom_bounds(h.h_f, h.h_b, GRID)
        assert lo <= hi + 1e-12
    cir = standard_channel("proakis_c").with_snr_db(20)
    h = design_hom(cir, 1)
    assert hom_bounds(h.h_f, h.h_b, GRID)[1] > capacity(cir, GRID)


def test_flat_channel_rates_coincide():
    r = rate_report(FLAT, 0, GRID)
    assert r.i_fom0 == pytest.approx(r.c, abs=1e-6)
    assert r.i_ubm == pytest.approx(r.c, abs=1e-6)


@pytest.mark.parametrize("snr", [0, 10, 20])
def test_epr4_chain_links(snr):
    r = rate_report(standard_channel("epr4").with_snr_db(snr), 1, GRID)
    s = r.chain_slacks()
    for key in ("hom<=fom0", "fom0<=ubm", "ubm<=c", "hom_u<=fom1", "corollary<=1"):
        assert s[key] >= -1e-9, key


def test_corollary_bound():
    for n0 in (0.1, 1.0):
        assert corollary_check(standard_channel("epr4", n0), 1, GRID) <= 1
    for nu in (1, 2):
        assert corollary_check(standard_channel("proakis_c", 0.1), nu, GRID) <= 1
    for seed in range(20):
        assert corollary_check(random_iid_channel(5, seed, 0.1), 1, GRID) <= 1


def test_rates_csv():
    r = rate_report(standard_channel("epr4", 0.1), 1, GRID)
    nats = write_rates_csv([r]).splitlines()
    bits = write_rates_csv([r], units="bits").splitlines()
    assert nats[0].startswith("# chanshort-rates/1 nats")
    assert nats[1].split(",") == list(RATE_COLUMNS)
    c_nats = float(nats[2].split(",")[2])
    c_bits = float(bits[2].split(",")[2])
    assert c_bits == pytest.approx(c_nats / np.log(2))
