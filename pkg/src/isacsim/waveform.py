"""
Transmit side of the OFDM ISAC link.

Numerology, Gray-coded square QAM, and CP-OFDM modulation with a
rectangular pulse. Sign convention used everywhere in the package:
subcarrier ``k`` at body sample ``i`` contributes ``exp(+2j*pi*k*i/N_c)``
on modulation and the receiver applies the conjugate kernel. Both
directions carry a ``1/sqrt(N_c)`` factor so the DFT pair is unitary.

16QAM bit mapping (bits ``b0 b1 b2 b3``, 3GPP-style)::

    I = (1 - 2*b0) * (2 - (1 - 2*b2)) / sqrt(10)
    Q = (1 - 2*b1) * (2 - (1 - 2*b3)) / sqrt(10)

so ``0000 -> (1+1j)/sqrt(10)`` and ``0011 -> (3+3j)/sqrt(10)``. QPSK and
64QAM follow the same nesting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

SUPPORTED_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class NumerologyConfig:
    """Waveform constants of the OFDM frame.

    Defaults are the 3GPP FR2 numerology used throughout (28 GHz carrier,
    120 kHz spacing, 4096 subcarriers, 160 symbols, 0.59 us CP).
    """

    n_subcarriers: int = 4096
    subcarrier_spacing_hz: float = 120e3
    n_symbols: int = 160
    carrier_freq_hz: float = 28e9
    cp_duration_s: float = 0.59e-6

    def __post_init__(self):
        n = self.n_subcarriers
        if n <= 0 or n & (n - 1):
            raise ValueError(f"n_subcarriers must be a positive power of two, got {n}")
        if self.n_symbols <= 0:
            raise ValueError(f"n_symbols must be positive, got {self.n_symbols}")
        for name in ("subcarrier_spacing_hz", "carrier_freq_hz", "cp_duration_s"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.cp_samples >= n:
            raise ValueError("cyclic prefix must be shorter than the elementary symbol")

    @classmethod
    def paper(cls) -> "NumerologyConfig":
        return cls()

    @classmethod
    def small(cls) -> "NumerologyConfig":
        # same durations as the full-size frame, 8x less bandwidth
        return cls(n_subcarriers=512, n_symbols=32)

    @property
    def bandwidth_hz(self) -> float:
        return self.n_subcarriers * self.subcarrier_spacing_hz

    @property
    def elementary_duration_s(self) -> float:
        return 1.0 / self.subcarrier_spacing_hz

    @property
    def symbol_duration_s(self) -> float:
        return self.cp_duration_s + self.elementary_duration_s

    @property
    def sample_interval_s(self) -> float:
        return 1.0 / self.bandwidth_hz

    @property
    def cp_samples(self) -> int:
        return int(round(self.cp_duration_s * self.bandwidth_hz))

    @property
    def symbol_samples(self) -> int:
        """Samples per OFDM symbol including the cyclic prefix."""
        return self.n_subcarriers + self.cp_samples

    @property
    def frame_samples(self) -> int:
        return self.n_symbols * self.symbol_samples

    @property
    def range_bin_m(self) -> float:
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def velocity_bin_mps(self) -> float:
        frame_time = self.n_symbols * self.symbol_samples * self.sample_interval_s
        return SPEED_OF_LIGHT / (2.0 * self.carrier_freq_hz * frame_time)

    @property
    def cp_range_m(self) -> float:
        """Largest target range whose echo still falls inside the CP."""
        return SPEED_OF_LIGHT * self.cp_duration_s / 2.0


@dataclass(frozen=True)
class TimeFrame:
    """Complex baseband samples; ``origin`` is the index of t = 0."""

    samples: np.ndarray
    sample_interval_s: float
    origin: int = 0

    def __len__(self):
        return len(self.samples)


def _axis_levels(bits: np.ndarray) -> np.ndarray:
    # bits: (..., m) for one axis, most significant first
    m = bits.shape[-1]
    signs = 1 - 2 * bits.astype(np.int64)
    acc = np.ones(bits.shape[:-1], dtype=np.int64)
    for j in range(m - 1, 0, -1):
        acc = 2 ** (m - j) - signs[..., j] * acc
    return signs[..., 0] * acc


def qam_map(bits, order: int = 16) -> np.ndarray:
    """Map a bit sequence onto unit-average-power Gray-coded square QAM.

    Parameters
    ----------
    bits : array_like of {0, 1}
        Flat bit sequence, length divisible by ``log2(order)``.
    order : int
        Constellation size, one of 4, 16, 64.

    Returns
    -------
    np.ndarray
        Complex symbols, ``len(bits) // log2(order)`` of them.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported constellation order {order}; use one of {SUPPORTED_ORDERS}")
    bits = np.asarray(bits).ravel()
    k = int(np.log2(order))
    if bits.size % k:
        raise ValueError(f"bit length {bits.size} is not a multiple of {k}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    words = bits.reshape(-1, k)
    i_level = _axis_levels(words[:, 0::2])
    q_level = _axis_levels(words[:, 1::2])
    scale = np.sqrt(2.0 * (order - 1) / 3.0)
    return (i_level + 1j * q_level) / scale


def constellation(order: int = 16) -> np.ndarray:
    """All ``order`` points, indexed by the integer value of their bit word."""
    k = int(np.log2(order))
    words = (np.arange(order)[:, None] >> np.arange(k - 1, -1, -1)) & 1
    return qam_map(words.ravel(), order)


def division_penalty(order: int = 16) -> float:
    """Mean of ``1/|S|^2`` over the constellation.

    Point-wise division by the payload scales white disturbance by this
    factor, so it is the gap between frequency-domain SINR and per-cell
    SINR of the channel-information matrix.
    """
    pts = constellation(order)
    return float(np.mean(1.0 / np.abs(pts) ** 2))


def generate_payload(cfg: NumerologyConfig, seed=None, order: int = 16) -> np.ndarray:
    """Random ``M x N_c`` grid of QAM symbols, reproducible per ``seed``.

    ``seed`` may be anything ``np.random.default_rng`` accepts, including
    a ``Generator``.
    """
    rng = np.random.default_rng(seed)
    k = int(np.log2(order))
    bits = rng.integers(0, 2, size=cfg.n_symbols * cfg.n_subcarriers * k, dtype=np.int8)
    return qam_map(bits, order).reshape(cfg.n_symbols, cfg.n_subcarriers)


def ofdm_modulate(grid: np.ndarray, cfg: NumerologyConfig) -> TimeFrame:
    grid = np.asarray(grid)
    if grid.shape != (cfg.n_symbols, cfg.n_subcarriers):
        raise ValueError(
            f"grid shape {grid.shape} does not match ({cfg.n_symbols}, {cfg.n_subcarriers})"
        )
    n_c, n_cp = cfg.n_subcarriers, cfg.cp_samples
    body = np.fft.ifft(grid, axis=1) * np.sqrt(n_c)
    with_cp = np.concatenate([body[:, n_c - n_cp:], body], axis=1)
    return TimeFrame(with_cp.ravel(), cfg.sample_interval_s, origin=n_cp)


def ofdm_demodulate(frame: TimeFrame, cfg: NumerologyConfig) -> np.ndarray:
    """Strip the CP of each symbol and return the ``M x N_c`` spectrum."""
    n_c, n_cp = cfg.n_subcarriers, cfg.cp_samples
    x = np.asarray(frame.samples)[: cfg.frame_samples]
    if x.size < cfg.frame_samples:
        raise ValueError("frame shorter than M symbols")
    body = x.reshape(cfg.n_symbols, n_c + n_cp)[:, n_cp:]
    return np.fft.fft(body, axis=1) / np.sqrt(n_c)
