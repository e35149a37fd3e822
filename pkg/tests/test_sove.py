import numpy as np
import pytest

from chanshort.acceptance import brute_force_llrs
from chanshort.channel import Cir, random_iid_channel, standard_channel
from chanshort.design import FomFilters, HomFilters, UbmFilters, design_hom
from chanshort.modulation import BPSK, QPSK
from chanshort.montecarlo import transmit
from chanshort.sove import (SoveError, TrellisConfig, branch_metric_forney,
                            branch_metric_ungerboeck, equalize, forward_pass, hard_bits,
                            hard_decisions, llrs_for_delay)
from chanshort.spectral import TapVector


def test_forney_metric_examples():
    assert branch_metric_forney(2 - 1j, [0, 0], [0], [1, 0.5], [0.3]) == pytest.approx(5.0)
    assert branch_metric_forney(1.5 + 0.3, [1, 1], [1], [1, 0.5], [0.3]) == pytest.approx(0.0)
    # no feedback tail: plain full-state Forney metric
    assert branch_metric_forney(1.0, [1, -1], [], [1, 0.5], []) == pytest.approx(0.25)


def test_ungerboeck_metric_examples():
    assert branch_metric_ungerboeck(0.7 + 2j, [0, 1], [1, 0.2]) == 0.0
    assert branch_metric_ungerboeck(1.0, [1], [1]) == pytest.approx(-1.0)
    x, g = [1j, -1], [1.2, 0.3]
    a = branch_metric_ungerboeck(0.4 - 0.2j, x, g)
    b = branch_metric_ungerboeck(-0.4 + 0.2j, x, g)
    # only the y-dependent part of the cross term changes sign
    fixed = 1.2 + 2 * np.real(np.conj(1j) * 0.3 * -1)
    assert a + b == pytest.approx(2 * fixed)


def test_hard_decision_conventions():
    assert hard_bits(np.array([3.0, 0.2, 1e9])).tolist() == [1, 1, 1]
    assert hard_decisions(np.array([3.0]), BPSK)[0] == 1
    assert hard_bits(np.array([0.0, -1.0])).tolist() == [1, 0]


def test_noiseless_hom_decodes_exactly():
    cir = standard_channel("epr4").with_snr_db(40)
    rng = np.random.default_rng(1)
    bits = rng.integers(0, 2, 300)
    _, y = transmit(bits, BPSK, cir, rng, noise=np.zeros(300 + 3))
    frame = equalize(y, design_hom(cir, 1), TrellisConfig(1, BPSK), 300)
    assert np.array_equal(hard_bits(frame), bits)


@pytest.mark.parametrize("seed", range(4))
def test_full_state_matches_exhaustive_search(seed):
    cir = random_iid_channel(3, 50 + seed, n0=0.5)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, 8)
    _, y = transmit(bits, BPSK, cir, rng)
    filt = FomFilters(TapVector.impulse(), cir.h, TapVector([0.0]), 1.0, np.nan, 2)
    frame = equalize(y, filt, TrellisConfig(2, BPSK, d=8), 8)
    assert np.max(np.abs(frame.llrs - np.clip(brute_force_llrs(y, cir.taps, 8), -50, 50))) < 1e-10


def test_llr_forms_agree():
    cir = random_iid_channel(4, 7, n0=0.2)
    rng = np.random.default_rng(2)
    bits = rng.integers(0, 2, 2 * 40)
    _, y = transmit(bits, QPSK, cir, rng)
    hom = design_hom(cir, 2)
    fp = forward_pass(y, hom, TrellisConfig(2, QPSK), 40)
    for d in (2, 5, 40):
        ref = llrs_for_delay(fp, d, "branch").llrs
        for form in ("state", "delayed"):
            assert np.max(np.abs(llrs_for_delay(fp, d, form).llrs - ref)) < 1e-9


def dfe_decisions(y, f0, b, K):
    out = np.zeros(K)
    for k in range(K):
        fb = sum(b[i] * out[k - 1 - i] for i in range(len(b)) if k - 1 - i >= 0)
        r = y[k] - fb
        out[k] = 1.0 if abs(r - f0) ** 2 <= abs(r + f0) ** 2 else -1.0
    return out


def test_zero_memory_is_a_decision_feedback_detector():
    cir = standard_channel("proakis_c", 0.4)
    h = cir.taps
    filt = FomFilters(TapVector.impulse(), TapVector(h[:1]),
                      TapVector.at_delays(h[1:], 1), 1.0, np.nan, 0)
    K = 64
    for blk in range(100):
        rng = np.random.default_rng([11, blk])
        bits = rng.integers(0, 2, K)
        _, y = transmit(bits, BPSK, cir, rng)
        got = hard_decisions(equalize(y, filt, TrellisConfig(0, BPSK), K), BPSK).real
        assert np.array_equal(got, dfe_decisions(y, h[0], h[1:], K))


def test_llr_sign_flips_with_the_signal():
    cir = standard_channel("epr4", 0.2)
    rng = np.random.default_rng(4)
    bits = rng.integers(0, 2, 100)
    _, y = transmit(bits, BPSK, cir, rng)
    filt = FomFilters(TapVector.impulse(), cir.h, TapVector([0.0]), 1.0, np.nan, 3)
    a = equalize(y, filt, TrellisConfig(3, BPSK), 100).llrs
    b = equalize(-y, filt, TrellisConfig(3, BPSK), 100).llrs
    assert np.allclose(a, -b)


def test_config_validation():
    with pytest.raises(SoveError):
        TrellisConfig(2, BPSK, d=1)
    with pytest.raises(SoveError):
        TrellisConfig(6, "16qam")
    hom = HomFilters(TapVector.impulse(), TapVector([1.0, 0.1]), TapVector([0.0]), 1)
    with pytest.raises(SoveError):
        equalize(np.zeros(10), hom, TrellisConfig(1, BPSK, metric="ungerboeck"), 10)
    ubm = UbmFilters(TapVector.impulse(), TapVector([1.0]), 0.0, 0)
    with pytest.raises(SoveError):
        equalize(np.zeros(10), ubm, TrellisConfig(1, BPSK), 10)
