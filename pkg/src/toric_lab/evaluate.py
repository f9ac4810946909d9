"""Monte-Carlo evaluation of decoders, threshold estimation and reward-scheme comparison."""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np

from .agent import play_episode
from .checkpoint import Checkpoint, load_checkpoint
from .lattice import ErrorState, Syndrome, ToricLattice, crossing_parities, syndrome_array
from .mwpm import mwpm_decode

MWPM = "mwpm"
RL = "rl"

_Z95 = NormalDist().inv_cdf(0.975)


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("need at least one trial")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class SweepSpec:
    d: int
    p_values: tuple[float, ...]
    trials: int
    decoder: str = MWPM
    seed: int = 0
    checkpoint: Optional[str] = None
    max_episode_steps: Optional[int] = None  # defaults to the checkpoint's training cap

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.p_values:
            raise ValueError("need at least one error probability")
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ValueError("error probabilities must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.p_values, self.p_values[1:])):
            raise ValueError("p_values must be strictly increasing")
        if self.decoder not in (MWPM, RL):
            raise ValueError(f"decoder must be {MWPM!r} or {RL!r}")
        if self.decoder == RL and not self.checkpoint:
            raise ValueError("the rl decoder needs a checkpoint path")


@dataclass
class PointResult:
    p: float
    trials: int
    successes: int
    mean_steps: float
    histogram: dict[int, int] = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)


@dataclass
class SweepResult:
    d: int
    decoder: str
    points: list[PointResult]

    def rates(self) -> list[float]:
        return [pt.rate for pt in self.points]

    def p_values(self) -> list[float]:
        return [pt.p for pt in self.points]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def _mwpm_trial(lattice: ToricLattice, flips: np.ndarray) -> tuple[bool, int]:
    syn = Syndrome(syndrome_array(lattice.d, flips))
    corr = mwpm_decode(lattice, syn)
    h, v = crossing_parities(lattice.d, flips ^ corr.flips)
    return h == 0 and v == 0, corr.weight


_WORKER_CKPT: dict[str, Checkpoint] = {}


def _load_cached(path: str) -> Checkpoint:
    ck = _WORKER_CKPT.get(path)
    if ck is None:
        ck = _WORKER_CKPT[path] = load_checkpoint(path)
    return ck


def _run_trials(job: tuple) -> list[tuple[bool, int]]:
    d, p, lo, hi, seed, decoder, ckpt_path, max_steps = job
    lattice = ToricLattice(d)
    out = []
    if decoder == RL:
        ck = _load_cached(ckpt_path)
        sched = ck.config.schedule
        if max_steps is not None:
            sched = replace(sched, max_episode_steps=max_steps)
    for t in range(lo, hi):
        rng = trial_rng(seed, t)
        flips = (rng.random(lattice.n_qubits) < p).astype(np.uint8)
        if decoder == MWPM:
            out.append(_mwpm_trial(lattice, flips))
        else:
            rec = play_episode(ck.params, ErrorState(d, flips), 0.0, rng, sched)
            out.append((rec.success, rec.steps))
    return out


def worker_count() -> int:
    env = os.environ.get("TORIC_LAB_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("TORIC_LAB_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _map_jobs(jobs: list[tuple], workers: int) -> list[list[tuple[bool, int]]]:
    if workers <= 1 or len(jobs) <= 1:
        return [_run_trials(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trials, jobs))


def evaluate(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    """Greedy decoding of ``trials`` independent error draws per p.

    Trial t always uses the random stream derived from (seed, t), so results do
    not depend on how trials are split across workers.
    """
    if spec.decoder == RL:
        ck = load_checkpoint(spec.checkpoint)
        if ck.config.network.d != spec.d:
            raise ValueError(
                f"checkpoint {spec.checkpoint} was trained for d={ck.config.network.d}, sweep asks for d={spec.d}"
            )
    ToricLattice(spec.d)
    workers = worker_count() if workers is None else workers
    chunk = max(1, math.ceil(spec.trials / max(1, workers)))
    points = []
    for p in spec.p_values:
        jobs = [
            (spec.d, p, lo, min(spec.trials, lo + chunk), spec.seed, spec.decoder, spec.checkpoint, spec.max_episode_steps)
            for lo in range(0, spec.trials, chunk)
        ]
        outcomes = [o for part in _map_jobs(jobs, workers) for o in part]
        hist = Counter(steps for _, steps in outcomes)
        points.append(
            PointResult(
                p=p,
                trials=spec.trials,
                successes=sum(ok for ok, _ in outcomes),
                mean_steps=sum(steps for _, steps in outcomes) / spec.trials,
                histogram=dict(sorted(hist.items())),
            )
        )
    return SweepResult(spec.d, spec.decoder, points)


@dataclass(frozen=True)
class ThresholdEstimate:
    lo: Optional[float]
    hi: Optional[float]
    crossings: tuple[tuple[int, int, float], ...]

    @property
    def found(self) -> bool:
        return self.lo is not None


def _pair_crossings(ps: Sequence[float], a: Sequence[float], b: Sequence[float]) -> list[float]:
    diff = [y - x for x, y in zip(a, b)]
    out = []
    for i in range(len(ps) - 1):
        d0, d1 = diff[i], diff[i + 1]
        if d0 == 0.0:
            out.append(ps[i])
        elif d0 * d1 < 0:
            out.append(ps[i] + (ps[i + 1] - ps[i]) * d0 / (d0 - d1))
    if diff and diff[-1] == 0.0:
        out.append(ps[-1])
    return out


def estimate_threshold(curves: dict[int, tuple[Sequence[float], Sequence[float]]]) -> ThresholdEstimate:
    """Where success-vs-p curves of different lattice sizes cross.

    ``curves`` maps d to (p values, success rates).  Crossings are found by
    linear interpolation between adjacent points of the shared p grid, for
    every pair of sizes; the interval spans all of them.
    """
    if len(curves) < 2:
        raise ValueError("threshold estimation needs curves for at least two lattice sizes")
    grids = [{round(p, 12): r for p, r in zip(ps, rs)} for ps, rs in curves.values()]
    common = sorted(set.intersection(*(set(g) for g in grids)))
    if len(common) < 2:
        raise ValueError("curves share fewer than two p values")
    by_d = {d: [g[p] for p in common] for d, g in zip(curves, grids)}
    crossings = []
    for d1, d2 in combinations(sorted(by_d), 2):
        for p in _pair_crossings(common, by_d[d1], by_d[d2]):
            crossings.append((d1, d2, p))
    if not crossings:
        return ThresholdEstimate(None, None, ())
    ps = [c[2] for c in crossings]
    return ThresholdEstimate(min(ps), max(ps), tuple(crossings))


def total_variation(h1: dict[int, int], h2: dict[int, int]) -> float:
    n1, n2 = sum(h1.values()), sum(h2.values())
    if n1 == 0 or n2 == 0:
        raise ValueError("empty histogram")
    keys = set(h1) | set(h2)
    return 0.5 * sum(abs(h1.get(k, 0) / n1 - h2.get(k, 0) / n2) for k in keys)


@dataclass
class RewardComparison:
    d: int
    first: SweepResult
    second: SweepResult
    tv_distance: list[float]


def compare_reward_modes(
    d: int,
    checkpoint_a: str,
    checkpoint_b: str,
    p_values: Sequence[float],
    trials: int,
    seed: int = 0,
    workers: Optional[int] = None,
) -> RewardComparison:
    """Evaluate two agents on identical error draws; report episode-length TV distance per p."""
    for path in (checkpoint_a, checkpoint_b):
        got = load_checkpoint(path).config.network.d
        if got != d:
            raise ValueError(f"checkpoint {path} has d={got}, expected d={d}")
    res = []
    for path in (checkpoint_a, checkpoint_b):
        res.append(evaluate(SweepSpec(d, tuple(p_values), trials, RL, seed, path), workers))
    tv = [total_variation(a.histogram, b.histogram) for a, b in zip(res[0].points, res[1].points)]
    return RewardComparison(d, res[0], res[1], tv)

