"""Agent-vs-MWPM curves, the RL threshold and the reward-scheme comparison from trained artifacts.

    python scripts/evaluate_agents.py --trials 10000
"""

import argparse
from pathlib import Path

import numpy as np

from toric_lab.cli import write_curves, write_histograms
from toric_lab.evaluate import MWPM, RL, SweepSpec, compare_reward_modes, estimate_threshold, evaluate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--dir", default="artifacts")
    args = ap.parse_args()
    art = Path(args.dir)

    # success vs p for every available agent, with MWPM on the same draws
    ps = (0.01, 0.03, 0.05, 0.07, 0.09, 0.1, 0.11, 0.13, 0.15)
    for ck in sorted(art.glob("d*_s*.ckpt")):
        d = int(ck.name[1])
        rl = evaluate(SweepSpec(d, ps, args.trials, RL, 11, str(ck)))
        mw = evaluate(SweepSpec(d, ps, args.trials, MWPM, 11))
        write_curves(art / f"{ck.stem}_curve.csv", [rl, mw], [ck.stem, "mwpm"])
        write_histograms(art / f"{ck.stem}_hist.csv", [rl], [ck.stem])
        print(ck.stem, " ".join(f"{p}:{a:.4f}/{b:.4f}" for p, a, b in zip(ps, rl.rates(), mw.rates())))

    # RL threshold from the best agent of each size
    grid = (0.095, 0.1, 0.105, 0.11)
    curves = {}
    for d in (3, 5, 7):
        best = None
        for ck in sorted(art.glob(f"d{d}_s*.ckpt")):
            res = evaluate(SweepSpec(d, grid, 2 * args.trials, RL, 66, str(ck)))
            if best is None or np.mean(res.rates()) > np.mean(best.rates()):
                best = res
        if best is not None:
            curves[d] = (best.p_values(), best.rates())
            print(f"RL d={d}: " + " ".join(f"{r:.4f}" for r in best.rates()))
    if len(curves) >= 2:
        est = estimate_threshold(curves)
        print(f"RL threshold interval [{est.lo}, {est.hi}]" if est.found else "RL curves do not cross")

    # reward schemes
    for d in (3, 5):
        a, b = art / f"d{d}_s1.ckpt", art / f"d{d}_mad_s1.ckpt"
        if a.exists() and b.exists():
            cmp = compare_reward_modes(d, str(a), str(b), (0.05, 0.1), args.trials, seed=77)
            write_curves(art / f"compare_d{d}.csv", [cmp.first, cmp.second], ["success_failure", "minimum_action"])
            write_histograms(art / f"compare_d{d}_hist.csv", [cmp.first, cmp.second], ["success_failure", "minimum_action"])
            print(f"d={d} TV {cmp.tv_distance} rates s/f {cmp.first.rates()} MAD {cmp.second.rates()}")


if __name__ == "__main__":
    main()
