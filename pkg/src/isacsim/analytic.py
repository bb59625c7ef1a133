"""
Closed-form interference powers, frequency-domain SINR, and the optimal
number of compensated samples.

Everything is expressed through the normalised excess delay
``N_e = (N_s - N_cp) / N_c`` and compensation length ``N_a = N' / N_c``.
Powers are in units of ``|gain|^2`` for signal terms and ``sigma^2`` for
noise, so ``p_noise = (1 + N_a) / gamma0`` once normalised by ``|gain|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .waveform import SPEED_OF_LIGHT, NumerologyConfig


@dataclass(frozen=True)
class SinrBreakdown:
    p_useful: float
    p_isi: float
    p_ici: float
    p_noise: float

    @property
    def sinr_linear(self) -> float:
        return self.p_useful / (self.p_isi + self.p_ici + self.p_noise)

    @property
    def sinr_db(self) -> float:
        return 10 * math.log10(self.sinr_linear)


@dataclass(frozen=True)
class CompensationPlan:
    n_comp: int
    sample_offset: int
    cp_samples: int
    n_subcarriers: int

    def __post_init__(self):
        if not 0 <= self.n_comp <= max_n_comp(self.n_subcarriers, self.sample_offset):
            raise ValueError(
                f"compensation length {self.n_comp} outside [0, min(N_s, N_c)]"
                f" with N_s={self.sample_offset}, N_c={self.n_subcarriers}"
            )

    @property
    def excess_norm(self) -> float:
        return (self.sample_offset - self.cp_samples) / self.n_subcarriers

    @property
    def comp_norm(self) -> float:
        return self.n_comp / self.n_subcarriers


@dataclass(frozen=True)
class DecisionThresholds:
    d0_m: float
    gamma_threshold_linear: float | None  # None when d >= d0


def max_n_comp(n_c: int, n_s: int) -> int:
    """Longest usable compensation: never past ``N_s``, never past one elementary symbol."""
    return max(min(n_s, n_c), 0)


def _check_regime(n_c, n_cp, n_s):
    if not n_cp <= n_s < n_c + n_cp:
        raise ValueError(
            f"sample offset {n_s} outside the modelled regime [{n_cp}, {n_c + n_cp})"
        )


def _inv(gamma0):
    return 0.0 if math.isinf(gamma0) else 1.0 / gamma0


def sinr_post(n_c: int, n_cp: int, n_s: int, n_comp: int, gamma0: float) -> SinrBreakdown:
    """Frequency-domain powers after adding ``n_comp`` trailing samples.

    ``gamma0`` is linear. ``n_comp = 0`` gives the uncompensated receiver.
    """
    _check_regime(n_c, n_cp, n_s)
    if not 0 <= n_comp <= max_n_comp(n_c, n_s):
        raise ValueError(f"n_comp={n_comp} must lie in [0, min(N_s={n_s}, N_c={n_c})]")
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    ne = (n_s - n_cp) / n_c
    na = n_comp / n_c
    x = abs(ne - na)
    return SinrBreakdown(
        p_useful=(1.0 - ne + na) ** 2,
        p_isi=ne,
        p_ici=x * (1.0 - x),
        p_noise=(1.0 + na) * _inv(gamma0),
    )


def sinr_pre(n_c: int, n_cp: int, n_s: int, gamma0: float) -> SinrBreakdown:
    """Frequency-domain powers of the plain 2D-FFT receiver."""
    return sinr_post(n_c, n_cp, n_s, 0, gamma0)


def sinr_ici_null(n_c, n_cp, n_s, gamma0) -> float:
    """Linear SINR at ``N' = N_s - N_cp`` in closed form."""
    return n_c / ((n_s - n_cp) + (n_c + n_s - n_cp) * _inv(gamma0))


def sinr_full(n_c, n_cp, n_s, gamma0) -> float:
    """Linear SINR at ``N' = N_s`` in closed form."""
    return (n_c + n_cp) ** 2 / (n_c * n_s - n_cp**2 + n_c * (n_c + n_s) * _inv(gamma0))


def d0_threshold(cfg: NumerologyConfig) -> float:
    """Distance beyond which compensating all ``N_s`` samples always wins."""
    t_d, t_cp = cfg.elementary_duration_s, cfg.cp_duration_s
    return (t_d**2 + t_d * t_cp + t_cp**2) / (2 * t_d + t_cp) * SPEED_OF_LIGHT / 2


def _threshold_denominator(n_c, n_cp, n_s):
    return (n_c + n_cp) ** 2 - n_s * (n_c + n_cp) - n_c * (n_s + n_cp)


def gamma_threshold(n_c: int, n_cp: int, n_s: int) -> float:
    """Received-SINR threshold below which ``N' = N_s`` beats ``N_s - N_cp``.

    Raises ``ValueError`` when the denominator is not positive, i.e. the
    target sits at or beyond ``d0`` and no threshold exists.
    """
    den = _threshold_denominator(n_c, n_cp, n_s)
    if den <= 0:
        raise ValueError(f"N_s={n_s} is at or beyond the d0 threshold; N' = N_s always optimal")
    return ((n_c + n_cp) * (n_c + n_s - n_cp) + n_c * (n_s - n_cp)) / den


def optimal_n_comp(n_c: int, n_cp: int, n_s: int, gamma0: float) -> int:
    """Number of compensated samples maximising the frequency-domain SINR.

    Works in sample units: the sign of the threshold denominator is the
    discrete counterpart of ``d > d0``, so the choice agrees with
    :func:`sinr_post`'s argmax even for targets within one sample of d0.
    When the echo outlasts the elementary symbol (``N_s > N_c``) the
    compensation is capped at ``N_c`` and the better end of
    ``[N_s - N_cp, N_c]`` is returned.
    """
    if n_s <= n_cp:
        return 0
    _check_regime(n_c, n_cp, n_s)
    if n_s > n_c:
        # echo longer than T_D: N' = N_s is not realisable, compare the two ends
        a, b = n_s - n_cp, n_c
        sa = sinr_post(n_c, n_cp, n_s, a, gamma0).sinr_linear
        sb = sinr_post(n_c, n_cp, n_s, b, gamma0).sinr_linear
        return b if sb > sa else a
    if _threshold_denominator(n_c, n_cp, n_s) <= 0:
        return n_s
    if gamma0 < gamma_threshold(n_c, n_cp, n_s):
        return n_s
    return n_s - n_cp


def optimal_compensation(distance_m: float, gamma0: float, cfg: NumerologyConfig) -> CompensationPlan:
    """Compensation plan for a target at ``distance_m`` with linear SINR ``gamma0``."""
    tau = 2.0 * distance_m / SPEED_OF_LIGHT
    if not 0 < tau < cfg.symbol_duration_s:
        raise ValueError(f"echo delay {tau:.3e} s outside (0, T)")
    n_s = int(round(tau / cfg.sample_interval_s))
    n_c, n_cp = cfg.n_subcarriers, cfg.cp_samples
    n_comp = optimal_n_comp(n_c, n_cp, n_s, gamma0)
    return CompensationPlan(n_comp, n_s, n_cp, n_c)


def thresholds(distance_m: float, cfg: NumerologyConfig) -> DecisionThresholds:
    d0 = d0_threshold(cfg)
    n_s = int(round(2.0 * distance_m / SPEED_OF_LIGHT / cfg.sample_interval_s))
    try:
        g = gamma_threshold(cfg.n_subcarriers, cfg.cp_samples, n_s)
    except ValueError:
        g = None
    return DecisionThresholds(d0, g)


def interference_free_sinr(gamma0: float) -> float:
    """Echo inside the CP: no ISI/ICI, SINR equals the received SINR."""
    return gamma0


def sinr_for_offset(n_c, n_cp, n_s, n_comp, gamma0) -> float:
    """Linear frequency-domain SINR for any ``N_s`` below one symbol."""
    if n_s <= n_cp:
        return interference_free_sinr(gamma0)
    return sinr_post(n_c, n_cp, n_s, n_comp, gamma0).sinr_linear
