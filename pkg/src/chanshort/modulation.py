"""Gray-labelled constellations with unit average energy.

Point ``i`` of a :class:`Modulation` carries the label whose bits are the
binary digits of ``i`` (most significant first). A bit value of 1 is the
"+1" hypothesis of the LLR convention used throughout the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class ModulationName(str, Enum):
    BPSK = "bpsk"
    QPSK = "qpsk"
    PSK8 = "8psk"
    QAM16 = "16qam"


def _gray_inverse(g: int) -> int:
    n = 0
    while g:
        n ^= g
        g >>= 1
    return n


def _points(name: ModulationName) -> np.ndarray:
    if name is ModulationName.BPSK:
        return np.array([-1.0, 1.0], dtype=complex)
    if name is ModulationName.QPSK:
        lab = np.arange(4)
        return ((2 * (lab >> 1) - 1) + 1j * (2 * (lab & 1) - 1)) / np.sqrt(2.0)
    if name is ModulationName.PSK8:
        pos = np.array([_gray_inverse(lab) for lab in range(8)])
        return np.exp(2j * np.pi * pos / 8)
    # 16QAM: two Gray-labelled 4-PAM axes, 00 01 11 10 -> -3 -1 1 3
    pam = {0b00: -3.0, 0b01: -1.0, 0b11: 1.0, 0b10: 3.0}
    lab = np.arange(16)
    re = np.array([pam[v >> 2] for v in lab])
    im = np.array([pam[v & 3] for v in lab])
    return (re + 1j * im) / np.sqrt(10.0)


@dataclass(frozen=True)
class Modulation:
    name: ModulationName
    points: np.ndarray = field(init=False, repr=False, compare=False)
    bit_labels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        name = ModulationName(self.name)
        object.__setattr__(self, "name", name)
        pts = _points(name)
        m = int(np.log2(pts.size))
        labels = (np.arange(pts.size)[:, None] >> np.arange(m - 1, -1, -1)) & 1
        pts.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "bit_labels", labels.astype(np.int8))

    @classmethod
    def of(cls, name) -> "Modulation":
        if isinstance(name, Modulation):
            return name
        return cls(ModulationName(str(name).lower()))

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return self.bit_labels.shape[1]

    def indices_from_bits(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64).reshape(-1, self.bits_per_symbol)
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        return bits @ weights

    def map_bits(self, bits) -> np.ndarray:
        bits = np.asarray(bits)
        if bits.size % self.bits_per_symbol:
            raise ValueError("bit count must be a multiple of bits per symbol")
        return self.points[self.indices_from_bits(bits)]

    def bits_from_indices(self, idx) -> np.ndarray:
        return self.bit_labels[np.asarray(idx)].reshape(-1)

    def nearest(self, symbols) -> np.ndarray:
        """Index of the closest point for each symbol."""
        s = np.asarray(symbols, dtype=complex).reshape(-1)
        return np.argmin(np.abs(s[:, None] - self.points[None, :]), axis=1)


BPSK = Modulation(ModulationName.BPSK)
QPSK = Modulation(ModulationName.QPSK)
PSK8 = Modulation(ModulationName.PSK8)
QAM16 = Modulation(ModulationName.QAM16)
