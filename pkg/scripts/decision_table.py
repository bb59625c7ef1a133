"""Print the closed-form decision quantities for a numerology.

    python scripts/decision_table.py --scale paper
"""

import argparse
import math

from isacsim import analytic
from isacsim.channel import anchor_sinr
from isacsim.waveform import NumerologyConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", choices=("small", "paper"), default="paper")
    args = ap.parse_args()
    cfg = NumerologyConfig.paper() if args.scale == "paper" else NumerologyConfig.small()

    print(f"CP-limited range      {cfg.cp_range_m:8.2f} m")
    print(f"d0                    {analytic.d0_threshold(cfg):8.2f} m")
    print(f"range bin             {cfg.range_bin_m:8.4f} m")
    print(f"velocity bin          {cfg.velocity_bin_mps:8.4f} m/s")
    print()
    print(f"{'d [m]':>7} {'N_s':>6} {'gamma0':>8} {'gamma_thr':>9} {'N_opt':>6} {'pre':>7} {'post':>7}")
    for d in (100, 200, 300, 400, 500, 600, 700, 800, 1000, 1200):
        g_db = anchor_sinr(d, cfg)
        g = 10 ** (g_db / 10)
        plan = analytic.optimal_compensation(d, g, cfg)
        thr = analytic.thresholds(d, cfg).gamma_threshold_linear
        n_c, n_cp, n_s = cfg.n_subcarriers, cfg.cp_samples, plan.sample_offset
        pre = analytic.sinr_for_offset(n_c, n_cp, n_s, 0, g)
        post = analytic.sinr_for_offset(n_c, n_cp, n_s, plan.n_comp, g)
        thr_s = f"{10 * math.log10(thr):9.2f}" if thr is not None else f"{'-':>9}"
        print(f"{d:7.0f} {n_s:6d} {g_db:8.2f} {thr_s} {plan.n_comp:6d} "
              f"{10 * math.log10(pre):7.2f} {10 * math.log10(post):7.2f}")


if __name__ == "__main__":
    main()
