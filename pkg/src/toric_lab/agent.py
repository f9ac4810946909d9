"""Deep Q-learning over syndrome perspectives: action selection, episodes, training."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .checkpoint import Checkpoint, save_checkpoint
from .config import SUCCESS_FAILURE, TrainConfig, TrainSchedule
from .lattice import ErrorState, Syndrome, ToricLattice, crossing_parities, syndrome_array
from .perspectives import perspective_grids
from .qnet import AdamState, QNetworkParams, adam_step, network_for
from .replay import Experience, ReplayMemory

log = logging.getLogger(__name__)

LOG_HEADER = ("iter", "epsilon", "p", "steps", "success", "mean_loss", "wall_ms")


class TrainingDiverged(RuntimeError):
    def __init__(self, message: str, dump: dict):
        super().__init__(message)
        self.dump = dump


def _q_table(params: QNetworkParams, defects: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(N, 4) q-values and (N, 2) origins for every perspective of a syndrome."""
    grids, origins = perspective_grids(defects)
    if len(origins) == 0:
        return np.zeros((0, 4)), origins
    return network_for(params.config).forward(params, grids), origins


def select_action(
    params: QNetworkParams, syn: Syndrome | np.ndarray, eps: float, rng: np.random.Generator
) -> tuple[int, tuple[int, int], int]:
    """Epsilon-greedy choice over all (perspective, action) pairs.

    Returns (qubit, origin of the chosen perspective, action id).  Greedy ties go
    to the lowest perspective index, then the lowest action id.
    """
    defects = syn.defects if isinstance(syn, Syndrome) else syn
    d = defects.shape[0]
    origins = np.argwhere(defects)
    if len(origins) == 0:
        raise ValueError("cannot select an action in a terminal state")
    if eps > 0 and rng.random() < eps:
        flat = int(rng.integers(4 * len(origins)))
    else:
        q, _ = _q_table(params, defects)
        flat = int(np.argmax(q.reshape(-1)))
    k, a = divmod(flat, 4)
    origin = (int(origins[k, 0]), int(origins[k, 1]))
    return ToricLattice(d).boundary(*origin)[a], origin, a


def q_max(params: QNetworkParams, syn: Syndrome | np.ndarray) -> float:
    defects = syn.defects if isinstance(syn, Syndrome) else syn
    if not defects.any():
        return 0.0
    q, _ = _q_table(params, defects)
    return float(q.max())


def double_dqn_target(active: QNetworkParams, target: QNetworkParams, next_state: Syndrome | np.ndarray) -> float:
    """Value under ``target`` of the action ``active`` rates best."""
    defects = next_state.defects if isinstance(next_state, Syndrome) else next_state
    if not defects.any():
        return 0.0
    grids, _ = perspective_grids(defects)
    qa = network_for(active.config).forward(active, grids)
    qt = network_for(target.config).forward(target, grids)
    return float(qt.reshape(-1)[int(np.argmax(qa.reshape(-1)))])


def _batched_bootstrap(
    target: QNetworkParams, active: Optional[QNetworkParams], next_states: list[np.ndarray]
) -> np.ndarray:
    """max_a q(s', a) for each non-terminal s' using one forward pass; 0 for terminal."""
    out = np.zeros(len(next_states))
    stacks, owners = [], []
    for i, s in enumerate(next_states):
        if s.any():
            g, _ = perspective_grids(s)
            stacks.append(g)
            owners.append((i, len(g)))
    if not stacks:
        return out
    grids = np.concatenate(stacks)
    qt = network_for(target.config).forward(target, grids)
    qa = network_for(active.config).forward(active, grids) if active is not None else None
    pos = 0
    for i, n in owners:
        block = qt[pos : pos + n].reshape(-1)
        if qa is None:
            out[i] = block.max()
        else:
            out[i] = block[int(np.argmax(qa[pos : pos + n].reshape(-1)))]
        pos += n
    return out


def experience_input(lattice: ToricLattice, e: Experience) -> tuple[np.ndarray, int]:
    """Perspective grid and action id that reproduce a stored absolute action.

    When both plaquettes next to the qubit carry defects, the first in row-major
    order is used.
    """
    defects = e.state.defects
    candidates = sorted(p for p in lattice.plaquettes_of(e.action) if defects[p])
    if not candidates:
        raise ValueError(f"stored action {e.action} is not adjacent to any defect")
    r, c = candidates[0]
    a = lattice.boundary(r, c).index(e.action)
    cen = lattice.d // 2
    return np.roll(defects, (cen - r, cen - c), axis=(0, 1)), a


@dataclass
class EpisodeRecord:
    steps: int
    success: bool
    capped: bool
    total_reward: float
    trajectory: list[Experience] = field(default_factory=list, repr=False)


def play_episode(
    params: QNetworkParams,
    errors: ErrorState,
    eps: float,
    rng: np.random.Generator,
    schedule: TrainSchedule,
    memory: Optional[ReplayMemory] = None,
    on_step: Optional[Callable[[], None]] = None,
    keep_trajectory: bool = False,
) -> EpisodeRecord:
    """Decode one hidden error configuration with the agent.

    The hidden state is updated by each flip; the episode ends when the
    syndrome is empty or after ``schedule.max_episode_steps`` actions.

    A greedy policy is a function of the syndrome alone, so once a syndrome
    repeats the episode is bound to cycle until the cap.  When nothing is
    recorded that remainder is skipped with the identical outcome.
    """
    d = errors.d
    cap = schedule.max_episode_steps
    seen: Optional[set[bytes]] = set() if eps == 0 and memory is None and not keep_trajectory else None
    flips = errors.flips.copy()
    defects = syndrome_array(d, flips)
    traj: list[Experience] = []
    total = 0.0
    steps = 0
    success = False
    if not defects.any():
        h, v = crossing_parities(d, flips)
        return EpisodeRecord(0, h == 0 and v == 0, False, 0.0, traj)
    while True:
        if seen is not None:
            key = defects.tobytes()
            if key in seen:
                for t in range(steps + 1, cap + 1):
                    total += schedule.rewards.reward(schedule.reward_mode, False, False, t >= cap)
                return EpisodeRecord(cap, False, True, total, traj)
            seen.add(key)
        q, _, _ = select_action(params, defects, eps, rng)
        flips[q] ^= 1
        steps += 1
        nxt = syndrome_array(d, flips)
        terminal = not nxt.any()
        if terminal:
            h, v = crossing_parities(d, flips)
            success = h == 0 and v == 0
        last = steps >= cap
        r = schedule.rewards.reward(schedule.reward_mode, terminal, success, last)
        total += r
        if memory is not None or keep_trajectory:
            e = Experience(Syndrome(defects), q, r, Syndrome(nxt), terminal)
            if keep_trajectory:
                traj.append(e)
            if memory is not None:
                memory.append(e)
                if on_step is not None:
                    on_step()
        defects = nxt
        if terminal or last:
            return EpisodeRecord(steps, success, not terminal, total, traj)


def draw_nonterminal(lattice: ToricLattice, p: float, rng: np.random.Generator) -> ErrorState:
    """Sample errors at rate p, redrawing until the syndrome is non-empty."""
    if p <= 0:
        raise ValueError("training episodes need p > 0")
    while True:
        flips = (rng.random(lattice.n_qubits) < p).astype(np.uint8)
        if syndrome_array(lattice.d, flips).any():
            return ErrorState(lattice.d, flips)


def run_episode(
    params: QNetworkParams,
    p: float,
    schedule: TrainSchedule,
    memory: Optional[ReplayMemory],
    rng: np.random.Generator,
    eps: float = 0.0,
    on_step: Optional[Callable[[], None]] = None,
) -> EpisodeRecord:
    lattice = ToricLattice(params.config.d)
    errors = draw_nonterminal(lattice, p, rng)
    return play_episode(params, errors, eps, rng, schedule, memory, on_step, keep_trajectory=True)


class Trainer:
    """Single-writer training state: active/target nets, optimiser, memory."""

    def __init__(self, config: TrainConfig, seed: int):
        self.config = config
        self.seed = seed
        sched = config.schedule
        self.lattice = ToricLattice(config.network.d)
        self.net = network_for(config.network)
        init_ss, env_ss, learn_ss = np.random.SeedSequence(seed).spawn(3)
        init_active, init_target = init_ss.spawn(2)
        self.active = self.net.init_params(np.random.default_rng(init_active))
        self.target = self.net.init_params(np.random.default_rng(init_target))
        self.adam = AdamState.zeros_like(self.active, sched.lr, sched.beta1, sched.beta2)
        self.memory = ReplayMemory(sched.memory_capacity)
        self.env_rng = np.random.default_rng(env_ss)
        self.learn_rng = np.random.default_rng(learn_ss)
        self.updates = 0
        self.episodes = 0
        self._episode_losses: list[float] = []

    def sync_target(self) -> None:
        self.target = self.active.copy()

    def update(self) -> Optional[float]:
        """One learning step on a sampled batch; no-op until memory holds a full batch."""
        sched = self.config.schedule
        if len(self.memory) < sched.batch_size:
            return None
        batch = self.memory.sample(sched.batch_size, self.learn_rng)
        inputs = [experience_input(self.lattice, e) for e in batch]
        grids = np.stack([g for g, _ in inputs])
        actions = np.array([a for _, a in inputs])
        boot = _batched_bootstrap(
            self.target, self.active if sched.double_dqn else None, [e.next_state.defects for e in batch]
        )
        rewards = np.array([e.reward for e in batch])
        targets = rewards + sched.gamma * boot
        if sched.per_experience_updates:
            losses = []
            for i in range(len(batch)):
                grads, li, _ = self.net.backward(self.active, grids[i : i + 1], actions[i : i + 1], targets[i : i + 1])
                losses.append(li)
                if not np.isfinite(li):
                    break
                adam_step(self.active, grads, self.adam)
            loss = float(np.mean(losses))
        else:
            grads, loss, _ = self.net.backward(self.active, grids, actions, targets)
            if np.isfinite(loss):
                adam_step(self.active, grads, self.adam)
        # a finite loss can still hide an overflowing step, so look at the weights too
        if np.isfinite(loss) and not self.active.all_finite():
            loss = float("nan")
        if not np.isfinite(loss):
            dump = {
                "update": self.updates,
                "loss": repr(loss),
                "batch": [
                    {
                        "state": json.loads(e.state.to_json()),
                        "action": e.action,
                        "reward": e.reward,
                        "next_state": json.loads(e.next_state.to_json()),
                        "terminal": e.terminal,
                    }
                    for e in batch
                ],
                "targets": [repr(float(t)) for t in targets],
            }
            raise TrainingDiverged(f"non-finite loss at update {self.updates}", dump)
        self.updates += 1
        if self.updates % sched.target_sync_K == 0:
            self.sync_target()
        self._episode_losses.append(loss)
        return loss

    def run_training_episode(self) -> tuple[EpisodeRecord, float, float, float]:
        sched = self.config.schedule
        t = self.episodes
        eps = sched.epsilon(t)
        p = sched.error_rate(t)
        self._episode_losses = []
        errors = draw_nonterminal(self.lattice, p, self.env_rng)
        rec = play_episode(self.active, errors, eps, self.env_rng, sched, self.memory, self.update)
        self.episodes += 1
        mean_loss = float(np.mean(self._episode_losses)) if self._episode_losses else float("nan")
        return rec, eps, p, mean_loss

    def checkpoint(self) -> Checkpoint:
        return Checkpoint(
            config=self.config,
            params=self.active.copy(),
            target=self.target.copy(),
            adam=self.adam,
            cursor={"episodes": self.episodes, "updates": self.updates, "seed": self.seed},
        )


def _fmt(x: float) -> str:
    return "nan" if x != x else f"{x:.6g}"


def train(
    config: TrainConfig,
    seed: int,
    out: Optional[str | Path] = None,
    log_path: Optional[str | Path] = None,
    wall_clock: bool = False,
    progress_every: int = 0,
) -> Checkpoint:
    """Run every scheduled episode; write the log row by row and checkpoints.

    ``wall_ms`` in the log is left empty unless ``wall_clock`` is set, keeping
    the log byte-identical across reruns with the same seed.
    """
    trainer = Trainer(config, seed)
    total = config.schedule.total_iterations
    start = time.perf_counter()
    fh = open(log_path, "w", newline="") if log_path else None
    try:
        writer = csv.writer(fh, lineterminator="\n") if fh else None
        if writer:
            writer.writerow(LOG_HEADER)
        wins = 0
        for it in range(total):
            rec, eps, p, mean_loss = trainer.run_training_episode()
            wins += rec.success
            if writer:
                wall = f"{(time.perf_counter() - start) * 1000:.0f}" if wall_clock else ""
                writer.writerow((it, _fmt(eps), _fmt(p), rec.steps, int(rec.success), _fmt(mean_loss), wall))
            if progress_every and (it + 1) % progress_every == 0:
                log.info(
                    "episode %d/%d eps=%.3f p=%.4f success(last %d)=%.3f updates=%d",
                    it + 1, total, eps, p, progress_every, wins / progress_every, trainer.updates,
                )
                wins = 0
            every = config.checkpoint_every
            if out and every and (it + 1) % every == 0 and it + 1 < total:
                save_checkpoint(trainer.checkpoint(), out)
    finally:
        if fh:
            fh.close()
    ckpt = trainer.checkpoint()
    if out:
        save_checkpoint(ckpt, out)
    return ckpt
