import numpy as np
import pytest

from chanshort.modulation import BPSK, PSK8, QAM16, QPSK, Modulation


@pytest.mark.parametrize("mod", [BPSK, QPSK, PSK8, QAM16], ids=lambda m: m.name.value)
def test_unit_energy_and_gray_neighbours(mod):
    pts = mod.points
    assert np.mean(np.abs(pts) ** 2) == pytest.approx(1.0)
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, np.inf)
    dmin = d.min()
    for i in range(mod.size):
        for j in np.flatnonzero(np.isclose(d[i], dmin)):
            assert np.sum(mod.bit_labels[i] != mod.bit_labels[j]) == 1


@pytest.mark.parametrize("mod", [BPSK, QPSK, PSK8, QAM16], ids=lambda m: m.name.value)
def test_bits_round_trip(mod):
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 60 * mod.bits_per_symbol)
    x = mod.map_bits(bits)
    assert np.array_equal(mod.bits_from_indices(mod.nearest(x)), bits)


def test_label_convention():
    assert BPSK.map_bits([1, 0]).tolist() == [1, -1]
    assert QAM16.map_bits([0, 0, 1, 0]) == pytest.approx((-3 + 3j) / np.sqrt(10))
    assert Modulation.of("16QAM") is not None and Modulation.of(QPSK) is QPSK
    with pytest.raises(ValueError):
        BPSK.map_bits([1, 0, 1]) if BPSK.bits_per_symbol > 1 else QPSK.map_bits([1])
    with pytest.raises(ValueError):
        Modulation.of("64qam")
