"""Training schedules, reward rules and the named presets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .qnet import QNetworkConfig

SUCCESS_FAILURE = "success_failure"
MINIMUM_ACTION = "minimum_action"
REWARD_MODES = (SUCCESS_FAILURE, MINIMUM_ACTION)


def linear_ramp(t: int, start: float, end: float, length: int) -> float:
    """``start`` at t=0, ``end`` from t=length on, linear in between."""
    if length <= 0 or t >= length:
        return end
    if t <= 0:
        return start
    return start + (end - start) * (t / length)


@dataclass(frozen=True)
class RewardRule:
    success_reward: float = 1000.0
    failure_reward: float = 0.0
    per_step_penalty: float = -1.0

    def reward(self, mode: str, terminal: bool, success: bool, last_step: bool) -> float:
        if mode == MINIMUM_ACTION:
            return self.per_step_penalty
        if terminal:
            return self.success_reward if success else self.failure_reward
        if last_step:
            # step cap reached without clearing the syndrome
            return self.failure_reward
        return 0.0


@dataclass(frozen=True)
class TrainSchedule:
    eps_initial: float
    eps_final: float
    total_iterations: int
    iterations_at_p_final: int
    gamma: float
    p_initial: float = 0.01
    p_final: float = 0.10
    batch_size: int = 32
    target_sync_K: int = 500
    max_episode_steps: int = 1000
    reward_mode: str = SUCCESS_FAILURE
    memory_capacity: int = 3_000_000
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    double_dqn: bool = False
    # one Adam step per sampled experience instead of one per batch
    per_experience_updates: bool = False
    rewards: RewardRule = field(default_factory=RewardRule)

    def __post_init__(self) -> None:
        if isinstance(self.rewards, dict):
            object.__setattr__(self, "rewards", RewardRule(**self.rewards))
        if self.reward_mode not in REWARD_MODES:
            raise ValueError(f"reward_mode must be one of {REWARD_MODES}, got {self.reward_mode!r}")
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be positive")
        if not 0 <= self.iterations_at_p_final <= self.total_iterations:
            raise ValueError("iterations_at_p_final must lie in [0, total_iterations]")
        for name in ("eps_initial", "eps_final", "p_initial", "p_final", "gamma"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        for name in ("batch_size", "target_sync_K", "max_episode_steps", "memory_capacity"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.memory_capacity < self.batch_size:
            raise ValueError("memory_capacity must hold at least one batch")

    def epsilon(self, t: int) -> float:
        """Exploration rate for episode t (0-based); reaches eps_final on the last episode."""
        return linear_ramp(t, self.eps_initial, self.eps_final, self.total_iterations - 1)

    def error_rate(self, t: int) -> float:
        """Training error rate; p_final for the last ``iterations_at_p_final`` episodes."""
        return linear_ramp(t, self.p_initial, self.p_final, self.total_iterations - self.iterations_at_p_final)


@dataclass(frozen=True)
class TrainConfig:
    network: QNetworkConfig
    schedule: TrainSchedule
    checkpoint_every: int = 0

    def to_dict(self) -> dict:
        sched = asdict(self.schedule)
        return {"network": self.network.to_dict(), "schedule": sched, "checkpoint_every": self.checkpoint_every}

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainConfig":
        try:
            known = {f.name for f in fields(TrainSchedule)}
            unknown = set(obj["schedule"]) - known
            if unknown:
                raise ValueError(f"unknown schedule keys: {sorted(unknown)}")
            return cls(
                network=QNetworkConfig.from_dict(obj["network"]),
                schedule=TrainSchedule(**obj["schedule"]),
                checkpoint_every=int(obj.get("checkpoint_every", 0)),
            )
        except (KeyError, TypeError) as exc:
            # missing sections or fields surface as plain config errors
            raise ValueError(f"malformed config: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


# (eps initial, eps final, episodes, episodes at final p, gamma)
_AGENT_ROWS = {
    3: (0.75, 0.08, 1000, 300, 0.9),
    5: (0.75, 0.08, 2500, 1000, 0.95),
    7: (0.75, 0.08, 6000, 2000, 0.95),
    9: (0.5, 0.1, 8000, 3500, 0.95),
}


def _build_presets() -> dict[str, TrainConfig]:
    out = {}
    for d, (e0, e1, total, at_final, gamma) in _AGENT_ROWS.items():
        sched = TrainSchedule(
            eps_initial=e0,
            eps_final=e1,
            total_iterations=total,
            iterations_at_p_final=at_final,
            gamma=gamma,
        )
        base = TrainConfig(QNetworkConfig(d=d), sched)
        out[f"d{d}"] = base
        out[f"d{d}_p15"] = replace(base, schedule=replace(sched, p_final=0.15))
        out[f"d{d}_mad"] = replace(base, schedule=replace(sched, reward_mode=MINIMUM_ACTION))
    return out


PRESETS = _build_presets()


def preset(name: str) -> TrainConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
