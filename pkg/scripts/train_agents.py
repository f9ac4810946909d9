"""Train preset agents into artifacts/<preset>_s<seed>.ckpt (skipping ones already there).

    python scripts/train_agents.py d3 --seeds 1 2 3
    python scripts/train_agents.py d5 d5_mad --seeds 1
"""

import argparse
import logging
import time
from pathlib import Path

from toric_lab.agent import train
from toric_lab.config import preset


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("presets", nargs="+")
    ap.add_argument("--seeds", type=int, nargs="+", default=[1])
    ap.add_argument("--out", default="artifacts")
    ap.add_argument("--force", action="store_true", help="retrain even if the checkpoint exists")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.presets:
        cfg = preset(name)
        for seed in args.seeds:
            path = out / f"{name}_s{seed}.ckpt"
            if path.exists() and not args.force:
                print(f"{path} exists, skipping")
                continue
            start = time.perf_counter()
            ck = train(cfg, seed, out=path, log_path=path.with_name(path.name + ".log.csv"), progress_every=100)
            print(f"{name} seed {seed}: {ck.cursor} in {(time.perf_counter() - start) / 60:.1f} min")


if __name__ == "__main__":
    main()
