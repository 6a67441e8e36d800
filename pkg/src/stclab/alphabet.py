"""Signaling alphabets (square QAM over Gaussian integers) and the
component-wise nearest-point quantizer."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class UnsupportedOrderError(ValueError):
    """QAM order is not a supported square power of 4."""


def _canonical_order(points: np.ndarray) -> np.ndarray:
    """Sort by (real, imag); index 0 is the tie-break winner everywhere."""
    return points[np.lexsort((points.imag, points.real))]


@dataclass(frozen=True)
class Alphabet:
    """A finite signaling set in the complex plane.

    ``points`` is kept sorted by (real, imag) so that "first index wins"
    argmin scans implement the deterministic tie rule.
    """

    label: str
    points: np.ndarray = field(repr=False)
    mean_energy: float = 0.0

    def __post_init__(self):
        pts = _canonical_order(np.asarray(self.points, dtype=np.complex128))
        if pts.size == 0:
            raise ValueError("alphabet must be nonempty")
        if np.unique(pts).size != pts.size:
            raise ValueError("alphabet points must be distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "mean_energy", float(np.mean(np.abs(pts) ** 2)))

    def __len__(self) -> int:
        return self.points.size


def make_qam(order: int) -> Alphabet:
    """Square M-QAM on the odd-integer grid, M in {4, 16, 64}.

    Points are {a+bi : a,b in {+-1, +-3, ..., +-(sqrt(M)-1)}}, i.e. translated
    Gaussian integers, with no energy normalization.
    """
    if order not in (4, 16, 64):
        raise UnsupportedOrderError(f"unsupported QAM order {order}; pick 4, 16 or 64")
    side = int(round(order**0.5))
    levels = np.arange(-(side - 1), side, 2, dtype=np.float64)
    re, im = np.meshgrid(levels, levels)
    return Alphabet(label=f"{order}-QAM", points=(re + 1j * im).ravel())


def alphabet_by_name(name: str) -> Alphabet:
    """Resolve CLI-style names: qam4 | qam16 | qam64."""
    table = {"qam4": 4, "qam16": 16, "qam64": 64}
    key = name.strip().lower()
    if key not in table:
        raise UnsupportedOrderError(f"unknown alphabet {name!r}; choose from {sorted(table)}")
    return make_qam(table[key])


class Quantizer:
    """Component-wise nearest-point map onto an alphabet.

    Ties go to the point with the smaller (real, imag) pair, which is the
    first index of the canonically sorted point list.
    """

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def indices(self, v: np.ndarray) -> np.ndarray:
        """Indices into ``alphabet.points`` of the nearest point per component."""
        v = np.asarray(v, dtype=np.complex128)
        d2 = np.abs(v[..., None] - self.alphabet.points) ** 2
        return np.argmin(d2, axis=-1)

    def quantize(self, v: np.ndarray) -> np.ndarray:
        """Map every component of ``v`` to its nearest alphabet point."""
        return self.alphabet.points[self.indices(v)]

    __call__ = quantize
