"""Run every preset and write per-seed CSVs plus mean/std summaries.

    python scripts/reproduce_figures.py --out results --seeds 50
    python scripts/reproduce_figures.py --only fig6 --scale paper --seeds 10
"""

import argparse
import logging
import time
from pathlib import Path

from isacsim.experiments import PRESETS, columns_for, config_json, preset, run_sweep, summarize, to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--scale", choices=("small", "paper"), default="small")
    ap.add_argument("--seeds", type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=PRESETS)
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or PRESETS:
        ec = preset(name, args.scale)
        ec.base_seed, ec.jobs = args.seed, args.jobs
        if args.seeds is not None and ec.kind == "sweep":
            ec.n_seeds = args.seeds
        t0 = time.perf_counter()
        rows = run_sweep(ec)
        (out / f"{name}.csv").write_text(to_csv(rows, columns_for(ec)))
        (out / f"{name}.csv.config.json").write_text(config_json(ec) + "\n")
        value = "power_db" if ec.kind == "range_profile" else "rdm_sinr_db"
        summary = summarize(rows, value)
        cols = list(summary[0])
        (out / f"{name}_summary.csv").write_text(to_csv(summary, cols))
        print(f"{name}: {len(rows)} rows in {time.perf_counter() - t0:.1f} s -> {out / name}.csv")


if __name__ == "__main__":
    main()
