"""Single point-target echo: integer delay, Doppler, complex gain, AWGN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .waveform import SPEED_OF_LIGHT, NumerologyConfig, TimeFrame

ANCHOR_DISTANCE_M = 500.0
ANCHOR_SINR_DB = 2.0


def pathloss_db(distance_m: float, carrier_freq_ghz: float) -> float:
    """One-way urban-macro LOS path loss, ``d`` in metres and ``f_c`` in GHz."""
    if distance_m <= 0 or carrier_freq_ghz <= 0:
        raise ValueError("distance and carrier frequency must be positive")
    return 28.0 + 22.0 * np.log10(distance_m) + 20.0 * np.log10(carrier_freq_ghz)


def anchor_sinr(
    distance_m: float,
    cfg: NumerologyConfig,
    anchor: tuple[float, float] = (ANCHOR_DISTANCE_M, ANCHOR_SINR_DB),
) -> float:
    """Received echo SINR in dB at ``distance_m``, scaled from a reference target.

    The echo travels out and back, so the one-way path-loss difference is
    applied twice.
    """
    d_ref, sinr_ref = anchor
    if distance_m <= 0 or d_ref <= 0:
        raise ValueError("distances must be positive")
    f_ghz = cfg.carrier_freq_hz / 1e9
    return sinr_ref + 2.0 * (pathloss_db(d_ref, f_ghz) - pathloss_db(distance_m, f_ghz))


@dataclass(frozen=True)
class TargetScenario:
    """A point target as seen by the sensing receiver.

    Build it with :meth:`from_target` (physical units) or
    :meth:`from_offset` (sample units). ``noise_power`` is the variance of
    one complex noise sample.
    """

    distance_m: float
    speed_mps: float
    delay_s: float
    sample_offset: int
    doppler_hz: float
    gain: complex
    noise_power: float

    @property
    def received_sinr(self) -> float:
        if self.noise_power == 0:
            return np.inf
        return abs(self.gain) ** 2 / self.noise_power

    @property
    def received_sinr_db(self) -> float:
        return 10 * np.log10(self.received_sinr)

    def within_cp(self, cfg: NumerologyConfig) -> bool:
        return self.sample_offset <= cfg.cp_samples

    def check(self, cfg: NumerologyConfig) -> None:
        if self.sample_offset < 0:
            raise ValueError("negative sample offset")
        if self.sample_offset >= cfg.symbol_samples:
            raise ValueError(
                f"sample offset {self.sample_offset} reaches a full OFDM symbol "
                f"({cfg.symbol_samples} samples); only tau < T is modelled"
            )
        if not cfg.subcarrier_spacing_hz > 10 * abs(self.doppler_hz):
            raise ValueError(
                f"Doppler {self.doppler_hz:.1f} Hz violates subcarrier spacing > 10 f_d"
            )
        if self.noise_power < 0:
            raise ValueError("negative noise power")

    @classmethod
    def from_target(
        cls,
        cfg: NumerologyConfig,
        distance_m: float,
        speed_mps: float = 20.0,
        gamma0_db: float | None = None,
        noise_power: float = 1.0,
        anchor: tuple[float, float] = (ANCHOR_DISTANCE_M, ANCHOR_SINR_DB),
    ) -> "TargetScenario":
        """Target at ``distance_m``; ``gamma0_db=None`` uses the path-loss anchor.

        With ``noise_power=0`` the echo is noise-free and has unit amplitude.
        """
        if distance_m <= 0:
            raise ValueError("distance must be positive")
        if gamma0_db is None:
            gamma0_db = anchor_sinr(distance_m, cfg, anchor)
        delay = 2.0 * distance_m / SPEED_OF_LIGHT
        amp = np.sqrt(10 ** (gamma0_db / 10) * noise_power) if noise_power > 0 else 1.0
        sc = cls(
            distance_m=distance_m,
            speed_mps=speed_mps,
            delay_s=delay,
            sample_offset=int(round(delay / cfg.sample_interval_s)),
            doppler_hz=2.0 * speed_mps * cfg.carrier_freq_hz / SPEED_OF_LIGHT,
            gain=complex(amp * np.exp(-2j * np.pi * cfg.carrier_freq_hz * delay)),
            noise_power=noise_power,
        )
        sc.check(cfg)
        return sc

    @classmethod
    def from_offset(
        cls,
        cfg: NumerologyConfig,
        sample_offset: int,
        gain: complex = 1.0,
        doppler_hz: float = 0.0,
        noise_power: float = 0.0,
    ) -> "TargetScenario":
        delay = sample_offset * cfg.sample_interval_s
        sc = cls(
            distance_m=delay * SPEED_OF_LIGHT / 2.0,
            speed_mps=doppler_hz * SPEED_OF_LIGHT / (2.0 * cfg.carrier_freq_hz),
            delay_s=delay,
            sample_offset=int(sample_offset),
            doppler_hz=doppler_hz,
            gain=complex(gain),
            noise_power=noise_power,
        )
        sc.check(cfg)
        return sc


def receive_window(cfg: NumerologyConfig) -> int:
    """Receive window length in samples: the frame plus one extra symbol."""
    return (cfg.n_symbols + 1) * cfg.symbol_samples


def complex_noise(rng: np.random.Generator, n: int, power: float) -> np.ndarray:
    """Circularly-symmetric complex Gaussian noise with total variance ``power``."""
    w = rng.standard_normal((n, 2)) * np.sqrt(power / 2.0)
    return w[:, 0] + 1j * w[:, 1]


def apply_target_channel(tx: TimeFrame, sc: TargetScenario, cfg: NumerologyConfig, seed=None) -> TimeFrame:
    """Echo of ``tx`` off a single point target, sampled on the transmit clock.

    ``rx[i] = gain * tx[i - N_s] * exp(2j*pi*f_d*i*T_s) + w[i]`` over
    ``M*T + T`` worth of samples, ``i`` being the global sample index.
    """
    if len(tx) != cfg.frame_samples:
        raise ValueError(f"transmit frame has {len(tx)} samples, expected {cfg.frame_samples}")
    if not np.isclose(tx.sample_interval_s, cfg.sample_interval_s, rtol=1e-12):
        raise ValueError("transmit frame sample interval does not match the numerology")
    sc.check(cfg)

    n_win = receive_window(cfg)
    rx = np.zeros(n_win, dtype=complex)
    n_s = sc.sample_offset
    rx[n_s : n_s + len(tx)] = np.asarray(tx.samples)[: n_win - n_s]
    idx = np.arange(n_win)
    rx *= sc.gain * np.exp(2j * np.pi * sc.doppler_hz * idx * cfg.sample_interval_s)
    if sc.noise_power > 0:
        rng = np.random.default_rng(seed)
        rx += complex_noise(rng, n_win, sc.noise_power)
    return TimeFrame(rx, cfg.sample_interval_s, origin=tx.origin)
