"""
Receive-side sensing: segmentation, coherent compensation, demodulation,
range-Doppler map, peak extraction and the RDM-SINR metric.

The receiver shares the transmitter clock, so symbol ``n`` of the receive
frame is cut at the same sample positions the transmitter used (CP
skipped). Compensation adds the ``N'`` samples that follow each elementary
interval onto its first ``N'`` samples; those samples are read straight
from the raw receive frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytic import CompensationPlan, optimal_n_comp
from .waveform import SPEED_OF_LIGHT, NumerologyConfig, TimeFrame

GUARD_CELLS = 2
VCP_FLOOR = 1e-3


@dataclass
class RangeDopplerMap:
    """Complex range-Doppler cells, range along axis 0.

    ``integration_gain`` is the number of samples integrated coherently
    into the peak; dividing it out of the RDM-SINR gives a per-symbol
    figure comparable with the frequency-domain SINR.
    """

    cells: np.ndarray
    range_bin_m: float
    velocity_bin_mps: float
    integration_gain: int
    n_comp: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def power(self) -> np.ndarray:
        return np.abs(self.cells) ** 2

    @property
    def shape(self):
        return self.cells.shape


@dataclass(frozen=True)
class PeakEstimate:
    k_hat: int
    l_hat: int
    range_m: float
    speed_mps: float
    peak_power: float
    rdm_sinr_db: float


def _symbol_start(n, cfg):
    return n * cfg.symbol_samples + cfg.cp_samples


def segment(rx: TimeFrame, cfg: NumerologyConfig) -> np.ndarray:
    """``M x N_c`` matrix of CP-skipped elementary intervals."""
    x = np.asarray(rx.samples)
    need = (cfg.n_symbols + 1) * cfg.symbol_samples
    if x.size < need:
        raise ValueError(f"receive window has {x.size} samples, need {need}")
    rows = x[: cfg.frame_samples].reshape(cfg.n_symbols, cfg.symbol_samples)
    return rows[:, cfg.cp_samples :].copy()


def compensate(seg: np.ndarray, rx: TimeFrame, plan: CompensationPlan, cfg: NumerologyConfig) -> np.ndarray:
    """Add the ``N'`` samples after each elementary interval onto its front."""
    n_comp = plan.n_comp
    if n_comp > min(plan.sample_offset, cfg.n_subcarriers):
        raise ValueError("compensation longer than the sample offset or the elementary symbol")
    out = np.array(seg, dtype=complex, copy=True)
    if n_comp == 0:
        return out
    x = np.asarray(rx.samples)
    n_c = cfg.n_subcarriers
    last = _symbol_start(cfg.n_symbols - 1, cfg) + n_c + n_comp
    if last > x.size:
        raise ValueError(f"compensation needs {last} samples, receive window has {x.size}")
    starts = _symbol_start(np.arange(cfg.n_symbols), cfg) + n_c
    idx = starts[:, None] + np.arange(n_comp)[None, :]
    out[:, :n_comp] += x[idx]
    return out


def to_frequency(seg: np.ndarray, cfg: NumerologyConfig) -> np.ndarray:
    return np.fft.fft(seg, axis=1) / np.sqrt(cfg.n_subcarriers)


def demod_divide(seg: np.ndarray, grid: np.ndarray, cfg: NumerologyConfig) -> np.ndarray:
    """Channel information: per-symbol DFT divided point-wise by the payload."""
    return to_frequency(seg, cfg) / grid


def make_rdm(chan: np.ndarray, cfg: NumerologyConfig, n_comp: int | None = None) -> RangeDopplerMap:
    """IDFT over subcarriers (range) and DFT over symbols (Doppler)."""
    m, n_c = chan.shape
    rng_prof = np.fft.ifft(chan, axis=1)
    cells = np.fft.fft(rng_prof, axis=0).T
    return RangeDopplerMap(
        cells=cells,
        range_bin_m=cfg.range_bin_m,
        velocity_bin_mps=cfg.velocity_bin_mps,
        integration_gain=m * n_c,
        n_comp=n_comp,
    )


def signed_index(idx: int, n: int) -> int:
    """Map a DFT bin to its signed frequency index."""
    return idx - n if idx >= (n + 1) // 2 else idx


def rdm_sinr_db(rdm: RangeDopplerMap, peak: PeakEstimate | tuple[int, int], guard: int = GUARD_CELLS) -> float:
    """Peak power over mean power of the cells outside a guard block.

    The ``(2g+1) x (2g+1)`` block wraps around both axes, matching the
    circular nature of the DFT.
    """
    power = rdm.power
    n_r, n_d = power.shape
    k, l = (peak.k_hat, peak.l_hat) if isinstance(peak, PeakEstimate) else peak
    l %= n_d
    mask = np.ones_like(power, dtype=bool)
    rr = np.arange(k - guard, k + guard + 1) % n_r
    dd = np.arange(l - guard, l + guard + 1) % n_d
    mask[np.ix_(rr, dd)] = False
    if not mask.any():
        raise ValueError("map has no cells outside the guard block")
    background = max(float(power[mask].mean()), np.finfo(float).tiny)
    return float(10 * np.log10(power[k, l] / background))


def find_peak(rdm: RangeDopplerMap) -> PeakEstimate:
    """Strongest cell; ties go to the lowest range index, then Doppler index."""
    power = rdm.power
    n_r, n_d = power.shape
    k, l = np.unravel_index(int(np.argmax(power)), power.shape)
    l_signed = signed_index(int(l), n_d)
    try:
        sinr = rdm_sinr_db(rdm, (int(k), int(l)))
    except ValueError:
        sinr = float("nan")
    return PeakEstimate(
        k_hat=int(k),
        l_hat=l_signed,
        range_m=k * rdm.range_bin_m,
        speed_mps=l_signed * rdm.velocity_bin_mps,
        peak_power=float(power[k, l]),
        rdm_sinr_db=sinr,
    )


def per_symbol_sinr_db(rdm_sinr: float, rdm: RangeDopplerMap) -> float:
    return rdm_sinr - 10 * np.log10(rdm.integration_gain)


def make_plan(n_comp: int, n_s: int, cfg: NumerologyConfig) -> CompensationPlan:
    return CompensationPlan(n_comp, n_s, cfg.cp_samples, cfg.n_subcarriers)


def sense(rx: TimeFrame, grid: np.ndarray, cfg: NumerologyConfig, plan: CompensationPlan | None = None):
    """Full pipeline with a given plan (``None`` is the plain 2D-FFT receiver)."""
    seg = segment(rx, cfg)
    n_comp = 0
    if plan is not None:
        seg = compensate(seg, rx, plan, cfg)
        n_comp = plan.n_comp
    rdm = make_rdm(demod_divide(seg, grid, cfg), cfg, n_comp=n_comp)
    return find_peak(rdm), rdm


def estimate_gamma0(rdm: RangeDopplerMap, peak: PeakEstimate, grid: np.ndarray, cfg: NumerologyConfig) -> float:
    """Invert the uncompensated SINR formula from a measured 2D-FFT map.

    Returns ``inf`` when the measurement is interference-limited.
    """
    penalty = float(np.mean(1.0 / np.abs(grid) ** 2))
    ups = 10 ** (per_symbol_sinr_db(peak.rdm_sinr_db, rdm) / 10) * penalty
    n_s, n_cp, n_c = peak.k_hat, cfg.cp_samples, cfg.n_subcarriers
    ne = max(n_s - n_cp, 0) / n_c
    inv = (1 - ne) ** 2 / ups - (2 * ne - ne**2)
    return np.inf if inv <= 0 else 1.0 / inv


def estimate_offset_then_compensate(
    rx: TimeFrame,
    grid: np.ndarray,
    cfg: NumerologyConfig,
    sample_offset: int | None = None,
    gamma0: float | None = None,
):
    """Sense with a compensation length chosen from the data.

    Two-pass mode (``sample_offset=None``): the uncompensated map's peak
    range bin is taken as ``N_s``. Oracle mode uses the given offset. The
    compensation length then follows the optimal rule; ``gamma0`` (linear)
    is estimated from the first pass when not supplied.
    """
    if sample_offset is None or gamma0 is None:
        peak0, rdm0 = sense(rx, grid, cfg)
        if sample_offset is None:
            sample_offset = peak0.k_hat
        if gamma0 is None:
            gamma0 = estimate_gamma0(rdm0, peak0, grid, cfg)
    n_comp = optimal_n_comp(cfg.n_subcarriers, cfg.cp_samples, sample_offset, gamma0)
    return sense(rx, grid, cfg, make_plan(n_comp, sample_offset, cfg))


@dataclass(frozen=True)
class VcpConfig:
    """Sub-block geometry in OFDM symbols; ``vcp_len=None`` means ``N_s``."""

    sub_block_symbols: int = 12
    overlap_symbols: int = 4
    vcp_len: int | None = None
    floor: float = VCP_FLOOR

    def __post_init__(self):
        if not 0 <= self.overlap_symbols < self.sub_block_symbols:
            raise ValueError("overlap must be smaller than the sub-block")


def vcp_process(
    rx: TimeFrame,
    tx: TimeFrame,
    cfg: NumerologyConfig,
    vcp_cfg: VcpConfig = VcpConfig(),
    sample_offset: int | None = None,
) -> RangeDopplerMap:
    """Virtual-cyclic-prefix baseline.

    Echo and transmit frames are cut into overlapping sub-blocks; the
    ``vcp_len`` echo samples after each sub-block are added onto its front,
    both blocks are transformed, and the echo spectrum is divided by the
    transmit spectrum wherever the latter exceeds ``floor`` times its RMS.
    One range profile per sub-block forms the Doppler dimension. The map
    keeps the first ``N_c`` range bins so it lines up with :func:`make_rdm`.
    """
    sym = cfg.symbol_samples
    block = vcp_cfg.sub_block_symbols * sym
    stride = (vcp_cfg.sub_block_symbols - vcp_cfg.overlap_symbols) * sym
    vcp_len = vcp_cfg.vcp_len if vcp_cfg.vcp_len is not None else sample_offset
    if vcp_len is None:
        raise ValueError("VCP length needs either vcp_cfg.vcp_len or sample_offset")
    if vcp_len >= block:
        raise ValueError("VCP longer than a sub-block")
    x_tx = np.asarray(tx.samples)
    x_rx = np.asarray(rx.samples)
    if vcp_cfg.sub_block_symbols > cfg.n_symbols or len(x_tx) < block:
        raise ValueError(
            f"frame of {cfg.n_symbols} symbols cannot hold a {vcp_cfg.sub_block_symbols}-symbol sub-block"
        )
    n_blocks = (len(x_tx) - block) // stride + 1
    while n_blocks > 0 and (n_blocks - 1) * stride + block + vcp_len > len(x_rx):
        n_blocks -= 1
    if n_blocks < 1:
        raise ValueError("receive window too short for one sub-block plus its VCP")

    starts = np.arange(n_blocks) * stride
    idx = starts[:, None] + np.arange(block)[None, :]
    echo = x_rx[idx].copy()
    echo[:, :vcp_len] += x_rx[starts[:, None] + block + np.arange(vcp_len)[None, :]]
    spec_tx = np.fft.fft(x_tx[idx], axis=1)
    spec_rx = np.fft.fft(echo, axis=1)
    rms = np.sqrt(np.mean(np.abs(spec_tx) ** 2))
    keep = np.abs(spec_tx) >= vcp_cfg.floor * rms
    chan = np.zeros_like(spec_rx)
    chan[keep] = spec_rx[keep] / spec_tx[keep]
    profiles = np.fft.ifft(chan, axis=1)[:, : cfg.n_subcarriers]
    cells = np.fft.fft(profiles, axis=0).T

    slow_time = n_blocks * stride * cfg.sample_interval_s
    return RangeDopplerMap(
        cells=cells,
        range_bin_m=cfg.range_bin_m,
        velocity_bin_mps=SPEED_OF_LIGHT / (2.0 * cfg.carrier_freq_hz * slow_time),
        integration_gain=block * n_blocks,
        n_comp=None,
        meta={"n_blocks": n_blocks, "vcp_len": vcp_len, "guarded_bins": int((~keep).sum())},
    )


def frequency_symbols(rx: TimeFrame, cfg: NumerologyConfig, n_comp: int = 0, n_s: int | None = None) -> np.ndarray:
    """``M x N_c`` demodulated symbols ``Y_n(p)`` before division."""
    seg = segment(rx, cfg)
    if n_comp:
        seg = compensate(seg, rx, make_plan(n_comp, n_s if n_s is not None else n_comp, cfg), cfg)
    return to_frequency(seg, cfg)


def measure_sinr(y: np.ndarray, reference: np.ndarray, skip_first: bool = True) -> float:
    """Empirical SINR of ``y`` against the known useful-signal shape.

    The useful part is the least-squares projection of ``y`` onto
    ``reference``; everything else counts as interference plus noise.
    Row 0 has no preceding symbol and is skipped by default.
    """
    if skip_first:
        y, reference = y[1:], reference[1:]
    c = np.vdot(reference, y) / np.vdot(reference, reference)
    useful = np.abs(c) ** 2 * np.mean(np.abs(reference) ** 2)
    resid = np.mean(np.abs(y - c * reference) ** 2)
    return float(useful / resid)
