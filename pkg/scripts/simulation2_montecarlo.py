"""Monte-Carlo robustness batch: noisy parameters and per-step input disturbances.

Runs the batch, writes a batch bundle plus figure data and compares the mean
running L2 norm of the load position error against the nominal run.

Usage: python scripts/simulation2_montecarlo.py [--runs 100] [--snr 35] [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from dqcargo.cli import RunConfig, emit_plot_data, write_batch_bundle
from dqcargo.sim import cumulative_l2, monte_carlo, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--snr", type=float, default=35.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--plant-only", action="store_true", help="keep nominal parameters in the controller")
    ap.add_argument("--out", default="out/simulation2")
    args = ap.parse_args()

    cfg = RunConfig()
    cfg.noise.snr_db = args.snr
    cfg.noise.runs = args.runs
    cfg.noise.perturb_controller = not args.plant_only
    cfg.sim.seed = args.seed
    cfg.output.out_dir = args.out
    sim, params, gains, mission = cfg.sim_config(), cfg.params(), cfg.controller_gains(), cfg.mission_config()

    nominal = run(sim, params, gains, mission, None, cfg.guard_config())
    nominal_l2 = cumulative_l2(nominal.errors[:, 1:4], sim.dt)
    batch = monte_carlo(sim, params, gains, mission, cfg.noise_config(), args.runs, cfg.guard_config(), args.workers)

    out = Path(args.out)
    write_batch_bundle(out, cfg, batch, "simulation2")
    emit_plot_data(out)

    print(f"{batch.completed}/{batch.n_runs} runs completed")
    sw = batch.switch_times
    for name, col in zip(("pull", "raise", "track"), sw.T):
        col = col[np.isfinite(col)]
        if col.size:
            print(f"switch to {name:<5s}: {col.size} runs, t in [{col.min():.2f}, {col.max():.2f}] s, median {np.median(col):.2f} s")
    mean_l2 = batch.mean_l2
    over = mean_l2 > 3 * nominal_l2
    print(f"final mean L2 {mean_l2[-1]:.3f}, nominal {nominal_l2[-1]:.3f}, worst run {batch.l2_norms[:, -1].max():.3f}")
    if over.any():
        print(f"mean L2 above 3x nominal for t in [{batch.time[over].min():.2f}, {batch.time[over].max():.2f}] s")
    else:
        print("mean L2 within 3x nominal at every sample")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
