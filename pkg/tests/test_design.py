import warnings

import numpy as np
import pytest

from chanshort.channel import Cir, random_iid_channel, standard_channel
from chanshort.design import (DesignError, FeedbackQuality, TruncationWarning, design_hom,
                              epsilon_vectors, filters_from_dict, filters_to_dict, fom_gradient,
                              g_from_target, m_spectrum, m_tilde_spectrum, milb_general,
                              optimal_b, optimal_w, optimal_w_values, optimize_fom, optimize_ubm,
                              select_sigma, theorem1_rate, ubm_rate, zero_feedback)
from chanshort.rates import capacity, hom_bounds
from chanshort.spectral import FrequencyGrid, TapVector, dtft_values

GRID = FrequencyGrid(2048)
FLAT = Cir(TapVector([1.0]), 1.0, "flat")


def test_m_spectrum_examples():
    assert np.allclose(m_spectrum(FLAT, GRID).values, -0.5)
    m = m_spectrum(standard_channel("epr4", 0.1), FrequencyGrid(64)).values
    assert m[32].real == pytest.approx(-1.0)
    assert np.all(m_spectrum(standard_channel("epr4", 1e9), GRID).values.real < -1 + 1e-8)


def test_m_tilde_examples():
    m = m_spectrum(FLAT, GRID)
    assert np.allclose(m_tilde_spectrum(m, 0.0).values, 0)
    assert np.allclose(m_tilde_spectrum(m, 1.0).values, m.values)
    assert np.allclose(m_tilde_spectrum(m, 0.5).values, -3 / 8)


def test_epsilon_examples():
    cir = standard_channel("proakis_c", 0.1)
    f = TapVector([0.8, 0.4j])
    assert np.allclose(epsilon_vectors(f, cir, 0.0, 1, GRID).eps1, 0)
    assert np.allclose(epsilon_vectors(TapVector([0, 0]), cir, 1.0, 1, GRID).eps2, 0)
    coarse = epsilon_vectors(f, cir, 1.0, 1, FrequencyGrid(512))
    fine = epsilon_vectors(f, cir, 1.0, 1, FrequencyGrid(5120))
    assert np.max(np.abs(coarse.eps2 - fine.eps2)) < 1e-8
    assert np.all(np.linalg.eigvalsh(fine.eps2) <= 1e-15)


def test_milb_general_zero_filters():
    z = TapVector([0.0])
    assert milb_general(z, z, z, standard_channel("epr4", 0.3), 1.0, GRID) == 0.0


@pytest.mark.parametrize("cir, tol", [
    (standard_channel("proakis_c", 0.03), 1e-6),
    (random_iid_channel(5, 1, 0.05), 1e-6),
    # the DC null caps how well a truncated all-pass prefilter can be fitted
    (standard_channel("epr4", 0.1), 1e-5),
], ids=["proakis_c", "iid5", "epr4"])
def test_hom_triple_at_full_feedback_matches_upper_bound(cir, tol):
    hom = design_hom(cir, 1)
    val = milb_general(hom.w_hom, hom.h_f, hom.h_b, cir, 1.0, GRID)
    assert val == pytest.approx(hom_bounds(hom.h_f, hom.h_b, GRID)[1], abs=tol)


def test_optimal_w_closed_forms():
    cir = standard_channel("epr4", 0.2)
    H = dtft_values(cir.h, GRID)
    W = optimal_w_values(cir.h, None, cir, 0.0, GRID)
    expected = (1 + np.abs(H) ** 2) / (cir.n0 + np.abs(H) ** 2)
    away = np.abs(H) > 1e-6
    assert np.allclose(W[away], expected[away])
    w = optimal_w(TapVector([1.0]), zero_feedback(FLAT, 0), FLAT, 0.0, GRID)
    assert np.allclose(dtft_values(w, GRID), 1.0)


def test_optimal_w_is_stationary():
    cir = standard_channel("proakis_c", 0.1)
    f = TapVector([0.9, 0.5 - 0.2j])
    b = optimal_b(f, cir, 0.7, GRID)
    w = optimal_w(f, b, cir, 0.7, GRID, trunc_len=GRID.n_points)
    base = milb_general(w, f, b, cir, 0.7, GRID)
    for k in (0, 1, -1, 3):
        for unit in (1e-4, 1e-4j):
            taps = np.array(w.taps)
            taps[w.origin + k] += unit
            bumped = milb_general(TapVector(taps, w.origin), f, b, cir, 0.7, GRID)
            assert bumped <= base + 1e-12
            assert abs(bumped - base) < 1e-6


def test_optimal_b_examples():
    cir = standard_channel("proakis_c", 0.1)
    f = TapVector([0.9, 0.5])
    # eps1 and eps2 both scale with sigma, so b itself tends to a finite
    # limit; what vanishes is the fed-back term sigma * B
    small = [optimal_b(f, cir, s, GRID).taps for s in (1e-6, 1e-9)]
    assert np.allclose(small[0], small[1], atol=1e-5)
    assert np.max(np.abs(1e-9 * small[1])) < 1e-8
    assert theorem1_rate(f, cir, 1e-9, GRID) == pytest.approx(theorem1_rate(f, cir, 0.0, GRID))
    cir4 = standard_channel("epr4", 0.1)
    f2 = TapVector([0.7, 0.3, -0.2])
    eps = epsilon_vectors(f2, cir4, 1.0, 2, GRID)
    b0 = optimal_b(f2, cir4, 1.0, GRID).at(3)
    assert b0 == pytest.approx(-np.conj(eps.eps1[0]) / eps.eps2[0, 0].real)
    with pytest.raises(DesignError):
        optimal_b(f, cir, 0.0, GRID)


def test_optimal_b_beats_perturbations():
    rng = np.random.default_rng(3)
    cir = standard_channel("proakis_c", 0.05)
    f = TapVector([0.9, 0.4 + 0.1j])
    b = optimal_b(f, cir, 1.0, GRID)
    w = optimal_w(f, b, cir, 1.0, GRID, trunc_len=GRID.n_points)
    best = milb_general(w, f, b, cir, 1.0, GRID)
    for _ in range(100):
        d = 0.05 * (rng.standard_normal(len(b)) + 1j * rng.standard_normal(len(b)))
        other = TapVector(np.asarray(b.taps) + d * (np.abs(b.taps) > 0), b.origin)
        assert milb_general(w, f, other, cir, 1.0, GRID) <= best + 1e-12


def test_closed_form_rate_flat_channel():
    assert theorem1_rate(TapVector([0.0]), FLAT, 0.0, GRID) == pytest.approx(0.5)
    assert theorem1_rate(TapVector([1.0]), FLAT, 0.0, GRID) == pytest.approx(np.log(2))
    assert capacity(FLAT, GRID) == pytest.approx(np.log(2))


def test_gradient_zero_at_zero_target_and_at_optimum():
    cir = standard_channel("proakis_c", 0.1)
    assert np.allclose(fom_gradient(TapVector([0.0, 0.0]), cir, 0.5, GRID), 0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = optimize_fom(cir, 1, 0.0, max_iters=200, rel_tol=1e-15)
    assert np.max(np.abs(fom_gradient(res.f, cir, 0.0))) < 1e-6


def test_optimize_fom_full_memory_is_bounded_by_capacity():
    cir = standard_channel("epr4", 0.1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        res = optimize_fom(cir, 3, 0.0)
    assert res.milb <= capacity(cir) + 1e-9
    assert res.milb >= res.history[0] - 1e-12
    assert np.all(np.diff(res.history) >= -1e-12)


def test_fom_zero_is_below_ubm():
    for snr in (0, 10, 20):
        cir = standard_channel("epr4").with_snr_db(snr)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            fom = optimize_fom(cir, 1, 0.0, init=design_hom(cir, 1).h_f)
        assert fom.milb <= optimize_ubm(cir, 1).milb + 1e-9


def test_ubm_rate_examples():
    assert ubm_rate([0.0], FLAT, GRID) == pytest.approx(0.5)
    assert ubm_rate([1.0], FLAT, GRID) == pytest.approx(np.log(2))
    cir = standard_channel("proakis_c", 0.2)
    f = TapVector([0.8, -0.3 + 0.4j])
    assert ubm_rate(g_from_target(f), cir, GRID) == pytest.approx(theorem1_rate(f, cir, 0.0, GRID))
    with pytest.raises(DesignError):
        ubm_rate([-2.0], FLAT, GRID)


@pytest.mark.parametrize("cir", [standard_channel("epr4", 0.1), random_iid_channel(5, 2, 0.05)],
                         ids=lambda c: c.name)
def test_ubm_optimum(cir):
    full = optimize_ubm(cir, cir.length - 1)
    assert full.milb == pytest.approx(capacity(cir), abs=1e-6)
    one = optimize_ubm(cir, 1)
    assert abs(one.stationarity + 1) < 1e-6
    assert one.milb <= capacity(cir) + 1e-9


def test_select_sigma():
    assert select_sigma(2 / 3).shortener == "fom" and select_sigma(2 / 3).sigma == 1.0
    assert select_sigma(1 / 3).shortener == "ubm"
    assert select_sigma(0.5, delta_mse=0.1).advisory_sigma_floor == pytest.approx(0.95)
    with pytest.raises(ValueError):
        select_sigma(1.2)


def test_feedback_quality_validation():
    FeedbackQuality(0.5)
    with pytest.raises(ValueError):
        FeedbackQuality(1.5)


def test_filters_json_round_trip():
    cir = standard_channel("epr4", 0.1)
    for filt in (optimize_fom(cir, 1, 1.0), optimize_ubm(cir, 1), design_hom(cir, 1)):
        d = filters_to_dict(filt)
        back = filters_from_dict(d)
        assert back.kind == filt.kind
        assert filters_to_dict(back)["nu"] == 1


def test_nu_out_of_range():
    with pytest.raises(DesignError):
        optimize_fom(standard_channel("epr4", 0.1), 4, 1.0)
