"""Rayleigh MIMO channel simulation and the per-group equivalent channels.

All randomness flows through explicit numpy generators.  Monte Carlo code
derives one generator per trial from (master_seed, stream, trial) so trials
are order-independent and safe to distribute across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import CodeSpec, DimensionMismatchError, encode
from .alphabet import Alphabet
from .linalg import vectorize


def trial_rng(*key: int) -> np.random.Generator:
    """Deterministic generator keyed by an integer tuple."""
    return np.random.default_rng(list(key))


def sample_channel(n: int, rng: np.random.Generator) -> np.ndarray:
    """n x n matrix of i.i.d. circularly-symmetric unit-variance complex Gaussians."""
    z = rng.standard_normal((n, n, 2))
    return np.sqrt(0.5) * (z[..., 0] + 1j * z[..., 1])


def sample_noise(length: int, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Length-``length`` vector of i.i.d. CN(0, sigma2) samples."""
    if sigma2 < 0:
        raise ValueError("noise variance must be nonnegative")
    if sigma2 == 0.0:
        return np.zeros(length, dtype=np.complex128)
    z = rng.standard_normal((length, 2))
    return np.sqrt(sigma2 / 2.0) * (z[:, 0] + 1j * z[:, 1])


def sample_symbols(alphabet: Alphabet, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform (n, n) symbol block; row i is group s_i."""
    idx = rng.integers(0, len(alphabet), size=(n, n))
    return alphabet.points[idx]


def equivalent_channels(spec: CodeSpec, h: np.ndarray) -> tuple:
    """The n matrices (n^2 x n) that map symbol group s_i into vec(H X)."""
    n = spec.n
    h = np.asarray(h, dtype=np.complex128)
    if h.shape != (n, n):
        raise DimensionMismatchError(f"channel must be {n}x{n}, got {h.shape}")
    eqs = []
    for i in range(n):
        m = h * spec.omega_table[:, i][None, :]  # H @ diag(conjugates of basis i)
        blocks = spec.gamma_blocks[i].reshape(n, n, n)
        eqs.append(np.einsum("ab,jbm->jam", m, blocks).reshape(n * n, n))
    return tuple(eqs)


@dataclass(frozen=True)
class ChannelContext:
    """A channel realization with its derived equivalent channels."""

    h: np.ndarray = field(repr=False)
    equivalents: tuple = field(repr=False)
    noise_variance: float = 0.0


@dataclass(frozen=True)
class Transmission:
    """One vectorized receive vector with its ground truth."""

    y: np.ndarray = field(repr=False)
    truth: np.ndarray = field(repr=False)
    context: ChannelContext = field(repr=False)


def build_context(spec: CodeSpec, h: np.ndarray, sigma2: float = 0.0) -> ChannelContext:
    return ChannelContext(h=h, equivalents=equivalent_channels(spec, h), noise_variance=float(sigma2))


def transmit(
    spec: CodeSpec,
    s: np.ndarray,
    h: np.ndarray,
    sigma2: float,
    rng: np.random.Generator,
) -> Transmission:
    """y = vec(H * encode(s)) + CN(0, sigma2) noise."""
    ctx = build_context(spec, h, sigma2)
    y = vectorize(h @ encode(spec, s)) + sample_noise(spec.n * spec.n, sigma2, rng)
    return Transmission(y=y, truth=np.asarray(s, dtype=np.complex128), context=ctx)
