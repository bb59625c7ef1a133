"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines print even without ``-s``).
"""

import time
from collections import defaultdict

import numpy as np
import pytest

from isacsim import analytic as an
from isacsim import sensing as se
from isacsim.channel import TargetScenario, apply_target_channel
from isacsim.cli import main
from isacsim.experiments import ExperimentConfig, preset, run_sweep
from isacsim.waveform import SPEED_OF_LIGHT, NumerologyConfig, generate_payload, ofdm_modulate


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return _report


def _mean_by(rows, key, value="rdm_sinr_db"):
    acc = defaultdict(list)
    for r in rows:
        acc[key(r)].append(r[value])
    return {k: float(np.mean(v)) for k, v in acc.items()}


def test_c1_analytic_simulation_agreement(report):
    cfg = NumerologyConfig.small()
    n_c, n_cp = cfg.n_subcarriers, cfg.cp_samples
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst, lines = 0.0, []
    p = np.arange(n_c)[None, :]
    for i in range(20):
        d = rng.uniform(100.0, 1200.0)
        g_db = rng.uniform(-10.0, 20.0)
        # the closed forms model delay only, so the target is static here
        sc = TargetScenario.from_target(cfg, d, speed_mps=0.0, gamma0_db=g_db)
        n_s = sc.sample_offset
        n_comp = int(rng.integers(0, an.max_n_comp(n_c, n_s) + 1))
        ry = rr = yy = 0.0
        for trial in range(100):
            seed = [i, trial]
            grid = generate_payload(cfg, seed + [0])
            rx = apply_target_channel(ofdm_modulate(grid, cfg), sc, cfg, seed + [1])
            y = se.frequency_symbols(rx, cfg, n_comp=n_comp, n_s=n_s)[1:]
            ref = (sc.gain * grid * np.exp(-2j * np.pi * p * n_s / n_c))[1:]
            ry += np.vdot(ref, y)
            rr += np.vdot(ref, ref).real
            yy += np.vdot(y, y).real
        c = ry / rr
        useful = abs(c) ** 2 * rr
        meas = 10 * np.log10(useful / (yy - useful))
        theory = an.sinr_post(n_c, n_cp, n_s, n_comp, sc.received_sinr).sinr_db
        worst = max(worst, abs(meas - theory))
        lines.append(f"d={d:.0f} g0={g_db:.1f} N'={n_comp}: {meas:.2f} vs {theory:.2f}")
    elapsed = time.perf_counter() - t0
    report(1, worst <= 0.5 and elapsed < 120,
           f"max |sim - theory| = {worst:.3f} dB over 20 triples x 100 trials (<= 0.5), {elapsed:.1f} s (< 120)")


def test_c2_ici_null(report):
    cfg = NumerologyConfig.paper()
    n_c, n_cp = cfg.n_subcarriers, cfg.cp_samples
    worst = 0.0
    for d in (150.0, 300.0, 500.0, 800.0, 1200.0):
        sc = TargetScenario.from_target(cfg, d, speed_mps=0.0, noise_power=0.0)
        n_s = sc.sample_offset
        grid = np.zeros((cfg.n_symbols, n_c), complex)
        n = 7
        grid[n] = generate_payload(cfg, int(d))[n]  # one symbol only: leaves ICI as the sole impairment
        rx = apply_target_channel(ofdm_modulate(grid, cfg), sc, cfg)
        y = se.frequency_symbols(rx, cfg, n_comp=n_s - n_cp, n_s=n_s)[n]
        useful = sc.gain * grid[n] * np.exp(-2j * np.pi * np.arange(n_c) * n_s / n_c)
        worst = max(worst, np.sum(np.abs(y - useful) ** 2) / np.sum(np.abs(useful) ** 2))
    report(2, worst < 1e-16, f"max leakage/useful = {worst:.2e} (< 1e-16)")


def _n_comp_curve(distance, g_db, n_seeds=50):
    ec = ExperimentConfig(
        distances_m=[distance], gamma0_db=g_db, receivers=["compensate"], policies=["fixed"],
        sweep_axis="n_comp", n_seeds=n_seeds,
    )
    curve = _mean_by(run_sweep(ec), key=lambda r: r["n_comp"])
    return max(curve, key=curve.get)


def test_c3_optimal_n_comp_peak_locations(report):
    cfg = NumerologyConfig.small()
    n_c, n_cp = cfg.n_subcarriers, cfg.cp_samples
    tol = n_cp / 2
    d0 = an.d0_threshold(cfg)
    n_300 = TargetScenario.from_target(cfg, 300.0).sample_offset
    low_g = -5.0
    assert 10 ** (low_g / 10) < an.gamma_threshold(n_c, n_cp, n_300)
    cases = [(300.0, 11.76, n_300 - n_cp), (300.0, low_g, n_300)]
    d_far = 800.0
    assert d_far > d0
    n_far = TargetScenario.from_target(cfg, d_far).sample_offset
    cases += [(d_far, g, n_far) for g in (-5.0, 5.0, 15.0)]
    ok, parts = True, []
    for d, g, expect in cases:
        peak = _n_comp_curve(d, g)
        hit = abs(peak - expect) <= tol
        ok &= hit
        parts.append(f"({d:.0f} m, {g:g} dB) peak N'={peak} expect {expect}{'' if hit else ' MISS'}")
    report(3, ok, f"peaks within +/-{tol:g} samples: " + "; ".join(parts))


def test_c4_fig6_gain(report):
    ec = preset("fig6", "small")
    rows = run_sweep(ec)
    mean = _mean_by(rows, key=lambda r: (r["sweep_var"], r["receiver"]))
    ok, parts = True, []
    for g in ec.sweep_values:
        gain = mean[(g, "compensate")] - mean[(g, "2dfft")]
        beats_vcp = mean[(g, "compensate")] >= mean[(g, "vcp")]
        ok &= 0.5 <= gain <= 5.5 and beats_vcp
        parts.append(f"{g:g} dB: +{gain:.2f} dB (vcp {mean[(g, 'vcp')] - mean[(g, '2dfft')]:+.2f})")
    report(4, ok, "compensation gain over 2D-FFT in [0.5, 5.5] dB and >= VCP: " + "; ".join(parts))


def test_c5_estimation_accuracy(report):
    cfg = NumerologyConfig.paper()
    sc = TargetScenario.from_target(cfg, 500.0, speed_mps=20.0, noise_power=0.0)
    grid = generate_payload(cfg, 5)
    rx = apply_target_channel(ofdm_modulate(grid, cfg), sc, cfg)
    r_tol = SPEED_OF_LIGHT / (2 * cfg.bandwidth_hz)
    ok, parts = True, []
    for name, n_comp in (("2dfft", 0), ("compensate", an.optimal_n_comp(
            cfg.n_subcarriers, cfg.cp_samples, sc.sample_offset, np.inf))):
        peak, _ = se.sense(rx, grid, cfg, se.make_plan(n_comp, sc.sample_offset, cfg))
        r_err, v_err = abs(peak.range_m - 500.0), abs(peak.speed_mps - 20.0)
        ok &= r_err <= r_tol and v_err <= cfg.velocity_bin_mps
        parts.append(f"{name}: range err {r_err:.3f} m (<= {r_tol:.3f}), "
                     f"velocity err {v_err:.3f} m/s (<= {cfg.velocity_bin_mps:.3f})")
    report(5, ok, "; ".join(parts))


def _sinr_grid(n_c, n_cp, n_s, gamma0):
    # independent vectorised evaluation of the post-compensation SINR over every N'
    na = np.arange(min(n_s, n_c) + 1) / n_c
    ne = (n_s - n_cp) / n_c
    x = np.abs(ne - na)
    return (1 - ne + na) ** 2 / (ne + x * (1 - x) + (1 + na) / gamma0)


def test_c6_threshold_oracles(report):
    d0 = an.d0_threshold(NumerologyConfig.paper())
    rng = np.random.default_rng(6)
    agree = 0
    for _ in range(10_000):
        cfg = NumerologyConfig(
            n_subcarriers=int(rng.choice([64, 256, 512, 1024, 4096])),
            cp_duration_s=rng.uniform(0.05, 0.25) / 120e3,
        )
        n_s = 0
        while n_s <= cfg.cp_samples:
            d = rng.uniform(1.0, 0.999 * cfg.symbol_duration_s * SPEED_OF_LIGHT / 2)
            n_s = int(round(2 * d / SPEED_OF_LIGHT / cfg.sample_interval_s))
        if n_s >= cfg.symbol_samples:
            n_s, d = cfg.symbol_samples - 1, (cfg.symbol_samples - 1.2) * cfg.range_bin_m
            n_s = int(round(2 * d / SPEED_OF_LIGHT / cfg.sample_interval_s))
        gamma0 = 10 ** rng.uniform(-2, 3)
        plan = an.optimal_compensation(d, gamma0, cfg)
        best = int(np.argmax(_sinr_grid(cfg.n_subcarriers, cfg.cp_samples, plan.sample_offset, gamma0)))
        agree += best == plan.n_comp
    ok = abs(d0 / 649 - 1) <= 1e-3 and agree == 10_000
    report(6, ok, f"d0 = {d0:.2f} m (649 +/- 0.1%); argmax agreement {agree}/10000")


def test_c7_interference_free_boundary(report):
    cfg = NumerologyConfig.small()
    gain_db = 10 * np.log10(cfg.n_subcarriers * cfg.n_symbols)
    worst, parts = 0.0, []
    # static target: the within-CP prediction covers delay only; the Doppler
    # offset of a moving target is checked separately in the sensing tests
    for d in (20.0, 50.0, 88.5):
        sc0 = TargetScenario.from_target(cfg, d)
        assert sc0.within_cp(cfg)
        for g in (-5.0, 0.0, 5.0, 10.0, 20.0, 30.0):
            sc = TargetScenario.from_target(cfg, d, speed_mps=0.0, gamma0_db=g)
            vals = []
            for s in range(5):
                grid = generate_payload(cfg, [s, 0], order=4)
                rx = apply_target_channel(ofdm_modulate(grid, cfg), sc, cfg, [s, 1])
                peak, rdm = se.sense(rx, grid, cfg)
                vals.append(se.per_symbol_sinr_db(peak.rdm_sinr_db, rdm))
            err = float(np.mean(vals)) - g
            worst = max(worst, abs(err))
            parts.append(f"{d:g} m/{g:g} dB: {err:+.2f}")
    report(7, worst <= 0.3, f"max |per-symbol RDM SINR - gamma0| = {worst:.3f} dB (<= 0.3); " + ", ".join(parts))


def test_c8_determinism(report, tmp_path):
    ok, parts = True, []
    for name in ("fig3", "fig6", "fig7"):
        outs = []
        for i in range(2):
            path = tmp_path / f"{name}_{i}.csv"
            code = main(["sweep", "--preset", name, "--seeds", "2", "--seed", "11", "--out", str(path), "-q"])
            outs.append(path.read_bytes() if code == 0 else None)
        same = outs[0] is not None and outs[0] == outs[1]
        ok &= same
        parts.append(f"{name}: {'identical' if same else 'DIFFERENT'} ({len(outs[0] or b'')} bytes)")
    report(8, ok, "; ".join(parts))
