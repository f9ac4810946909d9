"""Checkpoint files: a single ``.npz`` with tensors plus a JSON header."""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .qnet import AdamState, QNetworkParams

FORMAT_TAG = "toric-lab-checkpoint/1"


@dataclass
class Checkpoint:
    config: TrainConfig
    params: QNetworkParams
    target: QNetworkParams
    adam: AdamState
    cursor: dict = field(default_factory=dict)  # episodes done, updates done, seed


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    header = {
        "format": FORMAT_TAG,
        "config": ckpt.config.to_dict(),
        "cursor": ckpt.cursor,
        "adam": {"step": ckpt.adam.step, "lr": ckpt.adam.lr, "beta1": ckpt.adam.beta1, "beta2": ckpt.adam.beta2, "eps": ckpt.adam.eps},
        "n_tensors": len(ckpt.params.tensors),
    }
    arrays = {"header": np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)}
    for i, t in enumerate(ckpt.params.tensors):
        arrays[f"param_{i}"] = t
        arrays[f"target_{i}"] = ckpt.target.tensors[i]
        arrays[f"adam_m_{i}"] = ckpt.adam.m[i]
        arrays[f"adam_v_{i}"] = ckpt.adam.v[i]
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    # write in one go so a crash never leaves a half-written file under the final name
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(buf.getvalue())
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> Checkpoint:
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(bytes(z["header"]).decode())
        if header.get("format") != FORMAT_TAG:
            raise ValueError(f"{path}: not a toric-lab checkpoint (format {header.get('format')!r})")
        n = header["n_tensors"]
        params = [z[f"param_{i}"] for i in range(n)]
        target = [z[f"target_{i}"] for i in range(n)]
        m = [z[f"adam_m_{i}"] for i in range(n)]
        v = [z[f"adam_v_{i}"] for i in range(n)]
    config = TrainConfig.from_dict(header["config"])
    adam = AdamState(m=m, v=v, **header["adam"])
    return Checkpoint(
        config=config,
        params=QNetworkParams(config.network, params),
        target=QNetworkParams(config.network, target),
        adam=adam,
        cursor=header["cursor"],
    )
