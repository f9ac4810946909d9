"""Translation-invariant views of a syndrome, one per defect.

Each perspective rolls the syndrome so one defect sits on the central
plaquette.  The network then only scores the four edges of that plaquette.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import Syndrome, ToricLattice


@dataclass(frozen=True, eq=False)
class Perspective:
    grid: np.ndarray = field(repr=False)
    origin: tuple[int, int]

    @property
    def d(self) -> int:
        return self.grid.shape[0]

    @property
    def shift(self) -> tuple[int, int]:
        c = self.d // 2
        return c - self.origin[0], c - self.origin[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Perspective):
            return NotImplemented
        return self.origin == other.origin and np.array_equal(self.grid, other.grid)

    def to_json(self) -> dict:
        rs, cs = np.nonzero(self.grid)
        return {"d": self.d, "defects": [[int(r), int(c)] for r, c in zip(rs, cs)], "origin": list(self.origin)}


def perspective_grids(defects: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised core: (N, d, d) stack of centred grids and (N, 2) origins."""
    d = defects.shape[0]
    origins = np.argwhere(defects)
    if len(origins) == 0:
        return np.zeros((0, d, d), dtype=defects.dtype), origins
    c = d // 2
    ar = np.arange(d)
    rows = (ar[None, :] - c + origins[:, :1]) % d
    cols = (ar[None, :] - c + origins[:, 1:]) % d
    grids = defects[rows[:, :, None], cols[:, None, :]]
    return grids, origins


def make_perspectives(syn: Syndrome) -> list[Perspective]:
    if syn.is_terminal:
        raise ValueError("terminal state has no perspectives")
    grids, origins = perspective_grids(syn.defects)
    out = []
    for g, (r, c) in zip(grids, origins):
        g.setflags(write=False)
        out.append(Perspective(g, (int(r), int(c))))
    return out


def resolve_action(persp: Perspective, a: int) -> int:
    """Absolute qubit index for action ``a`` (up, down, left, right) of a perspective.

    Translation commutes with taking a plaquette's boundary, so this is simply
    the boundary edge of the origin plaquette.
    """
    if a not in (0, 1, 2, 3):
        raise ValueError(f"action id must be in 0..3, got {a}")
    return ToricLattice(persp.d).boundary(*persp.origin)[a]


def untranslate(persp: Perspective) -> np.ndarray:
    dr, dc = persp.shift
    return np.roll(persp.grid, (-dr, -dc), axis=(0, 1))
