"""
Seeded sweeps behind the range-Doppler experiments, emitted as CSV.

A run is described by an :class:`ExperimentConfig`. Every (scenario, seed)
pair is one independent task: it draws one payload and one noise
realisation and feeds the same receive frame to every receiver, so
receivers are compared under identical randomness. Rows are sorted by
(grid index, seed, receiver) whatever order the tasks finish in.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .channel import TargetScenario, apply_target_channel
from .sensing import (
    VcpConfig,
    estimate_offset_then_compensate,
    find_peak,
    make_plan,
    sense,
    vcp_process,
)
from .waveform import SPEED_OF_LIGHT, NumerologyConfig, generate_payload, ofdm_modulate

log = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "sweep_var", "seed", "receiver", "n_comp", "rdm_sinr_db", "analytic_sinr_db",
    "range_est_m", "range_err_m", "vel_est_mps", "vel_err_mps",
]
EXTRA_COLUMNS = ["distance_m", "gamma0_db", "policy"]
ANALYTIC_EXTRA = ["d0_m", "gamma_threshold_db", "cp_range_m"]
PROFILE_COLUMNS = ["range_m", "seed", "receiver", "n_comp", "power_db"]

RECEIVERS = ("2dfft", "compensate", "vcp")
POLICIES = ("optimal", "oracle-ns", "ici-null", "two-pass", "fixed")
AXES = ("distance_m", "gamma0_db", "n_comp", "none")
KINDS = ("sweep", "range_profile")
PRESETS = ("fig3", "fig4", "fig5", "fig6", "fig7")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str = "custom"
    kind: str = "sweep"
    scale: str = "small"
    numerology: NumerologyConfig | None = None
    distances_m: list = field(default_factory=lambda: [500.0])
    gamma0_db: float | None = None
    speed_mps: float = 20.0
    anchor_distance_m: float = 500.0
    anchor_sinr_db: float = 2.0
    receivers: list = field(default_factory=lambda: ["2dfft", "compensate"])
    policies: list = field(default_factory=lambda: ["optimal"])
    fixed_n_comp: int = 0
    sweep_axis: str = "none"
    sweep_values: list = field(default_factory=list)
    n_comp_step: int = 1
    order: int = 16
    n_seeds: int = 50
    base_seed: int = 0
    output: str | None = None
    jobs: int = 1

    def resolved_numerology(self) -> NumerologyConfig:
        if self.numerology is not None:
            return self.numerology
        return NumerologyConfig.paper() if self.scale == "paper" else NumerologyConfig.small()

    def validate(self) -> "ExperimentConfig":
        def bad(path, msg):
            raise ConfigError(f"{path}: {msg}")

        if self.kind not in KINDS:
            bad("kind", f"must be one of {KINDS}")
        if self.scale not in ("small", "paper"):
            bad("scale", "must be 'small' or 'paper'")
        if not self.distances_m:
            bad("scenario.distances_m", "needs at least one distance")
        if any(not d > 0 for d in self.distances_m):
            bad("scenario.distances_m", "distances must be positive")
        receivers = list(RECEIVERS) if "all" in self.receivers else self.receivers
        for r in receivers:
            if r not in RECEIVERS:
                bad("receivers", f"unknown receiver {r!r}; choose from {RECEIVERS} or 'all'")
        self.receivers = list(receivers)
        for p in self.policies:
            if p not in POLICIES:
                bad("policies", f"unknown policy {p!r}; choose from {POLICIES}")
        if self.sweep_axis not in AXES:
            bad("sweep.axis", f"must be one of {AXES}")
        if self.sweep_axis == "n_comp" and self.receivers != ["compensate"]:
            bad("receivers", "sweep axis n_comp only applies to the 'compensate' receiver")
        if self.sweep_axis in ("distance_m", "gamma0_db") and not self.sweep_values:
            bad("sweep.values", f"axis {self.sweep_axis} needs a list of values")
        if self.sweep_axis == "distance_m" and any(not v > 0 for v in self.sweep_values):
            bad("sweep.values", "distances must be positive")
        if self.n_comp_step < 1:
            bad("sweep.n_comp_step", "must be >= 1")
        if self.n_seeds < 1:
            bad("n_seeds", "must be >= 1")
        if self.jobs < 1:
            bad("jobs", "must be >= 1")
        if self.order not in (4, 16, 64):
            bad("order", "must be 4, 16 or 64")
        cfg = self.resolved_numerology()
        for d, _ in self.scenarios():
            tau = 2 * d / SPEED_OF_LIGHT
            if tau >= cfg.symbol_samples * cfg.sample_interval_s:
                bad("scenario", f"distance {d} m puts the echo beyond one OFDM symbol")
        return self

    def scenarios(self) -> list[tuple[float, float | None]]:
        """Distinct (distance, gamma0_db) pairs, in grid order."""
        if self.sweep_axis == "distance_m":
            return [(float(d), self.gamma0_db) for d in self.sweep_values]
        if self.sweep_axis == "gamma0_db":
            return [(float(d), float(g)) for d in self.distances_m for g in self.sweep_values]
        return [(float(d), self.gamma0_db) for d in self.distances_m]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["numerology"] = dataclasses.asdict(self.resolved_numerology())
        return d


def preset(name: str, scale: str = "small") -> ExperimentConfig:
    """Ready-made configuration for one of the range-Doppler experiments."""
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}; choose from {PRESETS}")
    common = dict(name=name, scale=scale)
    if name == "fig3":
        return ExperimentConfig(
            **common, distances_m=[300.0, 500.0], receivers=["compensate"], policies=["fixed"],
            sweep_axis="n_comp", n_comp_step=1 if scale == "small" else 8,
        )
    if name == "fig4":
        return ExperimentConfig(
            **common, distances_m=[800.0], receivers=["compensate"],
            policies=["ici-null", "oracle-ns"], sweep_axis="gamma0_db",
            sweep_values=[float(v) for v in np.arange(-10.0, 20.01, 2.5)],
        )
    if name == "fig5":
        return ExperimentConfig(
            **common, receivers=["2dfft", "compensate"], policies=["ici-null", "oracle-ns"],
            sweep_axis="distance_m", sweep_values=[float(v) for v in np.arange(100.0, 1300.01, 50.0)],
        )
    if name == "fig6":
        return ExperimentConfig(
            **common, distances_m=[500.0], receivers=["2dfft", "vcp", "compensate"],
            policies=["optimal"], sweep_axis="gamma0_db",
            sweep_values=[float(v) for v in np.arange(-5.0, 10.01, 2.5)],
        )
    return ExperimentConfig(
        **common, kind="range_profile", distances_m=[500.0], receivers=["2dfft", "compensate"],
        policies=["optimal"], n_seeds=1,
    )


# ---------------------------------------------------------------------------
# per-task work


def _n_comp_for(policy: str, cfg: NumerologyConfig, n_s: int, gamma0: float, fixed: int) -> int:
    n_cp = cfg.cp_samples
    if policy == "fixed":
        return fixed
    if n_s <= n_cp:
        return 0
    if policy == "oracle-ns":
        return analytic.max_n_comp(cfg.n_subcarriers, n_s)
    if policy == "ici-null":
        return n_s - n_cp
    return analytic.optimal_n_comp(cfg.n_subcarriers, n_cp, n_s, gamma0)


def _analytic_db(cfg: NumerologyConfig, n_s: int, n_comp: int | None, gamma0: float):
    if n_comp is None:
        return None
    n_c, n_cp = cfg.n_subcarriers, cfg.cp_samples
    if n_s <= n_cp:
        return 10 * math.log10(gamma0) if n_comp == 0 else None
    if not 0 <= n_comp <= analytic.max_n_comp(n_c, n_s):
        return None
    return analytic.sinr_post(n_c, n_cp, n_s, n_comp, gamma0).sinr_db


def _receiver_list(ec: ExperimentConfig):
    """(receiver, policy) pairs in output order."""
    out = []
    for r in ec.receivers:
        if r == "compensate":
            out.extend(("compensate", p) for p in ec.policies)
        else:
            out.append((r, ""))
    return out


def _n_comp_grid(ec: ExperimentConfig, n_s: int) -> list[int]:
    if ec.sweep_values:
        top = analytic.max_n_comp(ec.resolved_numerology().n_subcarriers, n_s)
        return [int(v) for v in ec.sweep_values if 0 <= int(v) <= top]
    top = analytic.max_n_comp(ec.resolved_numerology().n_subcarriers, n_s)
    grid = list(range(0, top + 1, ec.n_comp_step))
    if grid[-1] != top:
        grid.append(top)
    return grid


def _sweep_var(ec, d, g, n_comp):
    if ec.sweep_axis == "distance_m":
        return d
    if ec.sweep_axis == "gamma0_db":
        return g
    if ec.sweep_axis == "n_comp":
        return n_comp
    return d


def _simulate(ec: ExperimentConfig, d: float, g_db: float | None, seed: int):
    cfg = ec.resolved_numerology()
    sc = TargetScenario.from_target(
        cfg, d, ec.speed_mps, g_db, anchor=(ec.anchor_distance_m, ec.anchor_sinr_db)
    )
    grid = generate_payload(cfg, [seed, 0], order=ec.order)
    tx = ofdm_modulate(grid, cfg)
    rx = apply_target_channel(tx, sc, cfg, [seed, 1])
    return cfg, sc, grid, tx, rx


def _row(ec, sc, sweep_var, seed, receiver, policy, n_comp, peak, analytic_db):
    row = {
        "sweep_var": sweep_var, "seed": seed, "receiver": receiver, "n_comp": n_comp,
        "rdm_sinr_db": None, "analytic_sinr_db": analytic_db,
        "range_est_m": None, "range_err_m": None, "vel_est_mps": None, "vel_err_mps": None,
        "distance_m": sc.distance_m, "gamma0_db": sc.received_sinr_db, "policy": policy,
    }
    if peak is not None:
        row.update(
            rdm_sinr_db=peak.rdm_sinr_db,
            range_est_m=peak.range_m, range_err_m=peak.range_m - sc.distance_m,
            vel_est_mps=peak.speed_mps, vel_err_mps=peak.speed_mps - sc.speed_mps,
        )
    return row


def _sweep_task(args):
    ec, scen_idx, seed_idx = args
    d, g_db = ec.scenarios()[scen_idx]
    seed = ec.base_seed + seed_idx
    cfg, sc, grid, tx, rx = _simulate(ec, d, g_db, seed)
    n_s, gamma0 = sc.sample_offset, sc.received_sinr
    log.info("scenario d=%.1f m gamma0=%.2f dB seed=%d", d, sc.received_sinr_db, seed)
    out = []

    if ec.sweep_axis == "n_comp":
        for j, n_comp in enumerate(_n_comp_grid(ec, n_s)):
            peak, _ = sense(rx, grid, cfg, make_plan(n_comp, n_s, cfg))
            row = _row(ec, sc, n_comp, seed, "compensate", "fixed", n_comp, peak,
                       _analytic_db(cfg, n_s, n_comp, gamma0))
            out.append((((scen_idx, j), seed_idx, 0), row))
        return out

    var = _sweep_var(ec, d, g_db, None)
    for r_idx, (recv, policy) in enumerate(_receiver_list(ec)):
        key = ((scen_idx, 0), seed_idx, r_idx)
        if recv == "2dfft":
            peak, _ = sense(rx, grid, cfg)
            row = _row(ec, sc, var, seed, recv, "", 0, peak, _analytic_db(cfg, n_s, 0, gamma0))
        elif recv == "vcp":
            peak = find_peak(vcp_process(rx, tx, cfg, VcpConfig(), sample_offset=n_s))
            row = _row(ec, sc, var, seed, recv, "", None, peak, None)
        elif policy == "two-pass":
            peak, rdm = estimate_offset_then_compensate(rx, grid, cfg)
            row = _row(ec, sc, var, seed, recv, policy, rdm.n_comp, peak,
                       _analytic_db(cfg, n_s, rdm.n_comp, gamma0))
        else:
            n_comp = _n_comp_for(policy, cfg, n_s, gamma0, ec.fixed_n_comp)
            peak, _ = sense(rx, grid, cfg, make_plan(n_comp, n_s, cfg))
            row = _row(ec, sc, var, seed, recv, policy, n_comp, peak,
                       _analytic_db(cfg, n_s, n_comp, gamma0))
        out.append((key, row))
    return out


def _profile_task(args):
    ec, scen_idx, seed_idx = args
    d, g_db = ec.scenarios()[scen_idx]
    seed = ec.base_seed + seed_idx
    cfg, sc, grid, tx, rx = _simulate(ec, d, g_db, seed)
    n_s, gamma0 = sc.sample_offset, sc.received_sinr
    log.info("range profile d=%.1f m gamma0=%.2f dB seed=%d", d, sc.received_sinr_db, seed)
    out = []
    for r_idx, (recv, policy) in enumerate(_receiver_list(ec)):
        if recv == "vcp":
            rdm = vcp_process(rx, tx, cfg, VcpConfig(), sample_offset=n_s)
            n_comp = None
        else:
            n_comp = 0 if recv == "2dfft" else _n_comp_for(policy, cfg, n_s, gamma0, ec.fixed_n_comp)
            _, rdm = sense(rx, grid, cfg, make_plan(n_comp, n_s, cfg))
        peak = find_peak(rdm)
        cut = rdm.power[:, peak.l_hat % rdm.shape[1]]
        cut_db = 10 * np.log10(np.maximum(cut, np.finfo(float).tiny))
        for k, p in enumerate(cut_db):
            out.append((((scen_idx, k), seed_idx, r_idx), {
                "range_m": k * rdm.range_bin_m, "seed": seed, "receiver": recv,
                "n_comp": n_comp, "power_db": p,
            }))
    return out


def _run_tasks(ec: ExperimentConfig, worker):
    tasks = [(ec, i, s) for i in range(len(ec.scenarios())) for s in range(ec.n_seeds)]
    if ec.jobs > 1:
        with ProcessPoolExecutor(max_workers=ec.jobs) as pool:
            chunks = list(pool.map(worker, tasks))
    else:
        chunks = [worker(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda kr: kr[0])
    return [r for _, r in rows]


def run_sweep(ec: ExperimentConfig) -> list[dict]:
    """Simulate every grid point and seed; one dict per (point, seed, receiver)."""
    ec.validate()
    worker = _profile_task if ec.kind == "range_profile" else _sweep_task
    return _run_tasks(ec, worker)


def run_analytic(ec: ExperimentConfig) -> list[dict]:
    """Theory-only table in the sweep schema; simulation columns stay empty."""
    ec.validate()
    cfg = ec.resolved_numerology()
    d0 = analytic.d0_threshold(cfg)
    rows = []
    for d, g_db in ec.scenarios():
        sc = TargetScenario.from_target(
            cfg, d, ec.speed_mps, g_db, anchor=(ec.anchor_distance_m, ec.anchor_sinr_db)
        )
        n_s, gamma0 = sc.sample_offset, sc.received_sinr
        thr = analytic.thresholds(d, cfg).gamma_threshold_linear
        extra = {
            "d0_m": d0,
            "gamma_threshold_db": None if thr is None else 10 * math.log10(thr),
            "cp_range_m": cfg.cp_range_m,
        }
        if ec.sweep_axis == "n_comp":
            points = [(n, "compensate", "fixed") for n in _n_comp_grid(ec, n_s)]
        else:
            points = []
            for recv, policy in _receiver_list(ec):
                if recv == "vcp":
                    continue
                if recv == "2dfft":
                    points.append((0, recv, ""))
                else:
                    pol = "optimal" if policy == "two-pass" else policy
                    points.append((_n_comp_for(pol, cfg, n_s, gamma0, ec.fixed_n_comp), recv, policy))
        for n_comp, recv, policy in points:
            var = _sweep_var(ec, d, g_db, n_comp)
            row = _row(ec, sc, var, None, recv, policy, n_comp, None,
                       _analytic_db(cfg, n_s, n_comp, gamma0))
            row.update(extra)
            rows.append(row)
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.6f}"
    return str(v)


def columns_for(ec: ExperimentConfig, analytic_only: bool = False) -> list[str]:
    if ec.kind == "range_profile" and not analytic_only:
        return PROFILE_COLUMNS
    cols = SWEEP_COLUMNS + EXTRA_COLUMNS
    return cols + ANALYTIC_EXTRA if analytic_only else cols


def to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def summarize(rows: list[dict], value: str = "rdm_sinr_db") -> list[dict]:
    """Mean and standard deviation of ``value`` over seeds.

    Groups by every column except seed and the per-seed measurements, in
    first-appearance order.
    """
    per_seed = {"seed", "rdm_sinr_db", "range_est_m", "range_err_m", "vel_est_mps",
                "vel_err_mps", "gamma0_db", "power_db"}
    groups: dict[tuple, list] = {}
    keys: dict[tuple, dict] = {}
    for r in rows:
        k = tuple((c, r[c]) for c in r if c not in per_seed)
        keys.setdefault(k, dict(k))
        v = r.get(value)
        if v is not None:
            groups.setdefault(k, []).append(float(v))
    out = []
    for k, base in keys.items():
        vals = np.asarray(groups.get(k, []))
        out.append({**base, "n": vals.size,
                    "mean": float(vals.mean()) if vals.size else None,
                    "std": float(vals.std(ddof=1)) if vals.size > 1 else None})
    return out


def config_json(ec: ExperimentConfig) -> str:
    return json.dumps(ec.to_dict(), indent=2, sort_keys=True)
