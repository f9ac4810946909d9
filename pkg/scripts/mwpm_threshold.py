"""MWPM success-vs-p curves for d = 3, 5, 7 around the threshold, and their crossing.

    python scripts/mwpm_threshold.py [--trials 20000] [--out artifacts]
"""

import argparse
from pathlib import Path

from toric_lab.cli import write_curves
from toric_lab.evaluate import MWPM, SweepSpec, estimate_threshold, evaluate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--dims", type=int, nargs="+", default=[3, 5, 7])
    ap.add_argument("--out", default="artifacts")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ps = tuple(round(0.08 + 0.005 * k, 3) for k in range(9))
    results = [evaluate(SweepSpec(d, ps, args.trials, MWPM, seed=2020 + d)) for d in args.dims]
    write_curves(out / "mwpm_threshold.csv", results)
    for res in results:
        print(f"d={res.d}: " + " ".join(f"{p:.3f}:{r:.4f}" for p, r in zip(res.p_values(), res.rates())))
    est = estimate_threshold({res.d: (res.p_values(), res.rates()) for res in results})
    if est.found:
        print(f"MWPM threshold interval [{est.lo:.4f}, {est.hi:.4f}]")
    else:
        print("no crossing on this grid")


if __name__ == "__main__":
    main()
