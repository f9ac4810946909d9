"""Toric code geometry under bit-flip noise.

Qubits live on the edges of a d x d periodic lattice.  Edge indices are

    orientation * d**2 + r * d + c

with orientation 0 for the horizontal edge on top of plaquette (r, c) and
orientation 1 for the vertical edge on its left.  X errors are detected by the
Z-type plaquette checks, so defects sit on plaquettes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

HORIZONTAL = 0
VERTICAL = 1

# Order of the four boundary edges of a plaquette; also the network's action order.
UP, DOWN, LEFT, RIGHT = range(4)
DIRECTIONS = ("up", "down", "left", "right")


class PreconditionError(ValueError):
    """Raised when an operation is applied outside its domain."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    if isinstance(arr, np.ndarray) and arr.dtype == np.uint8 and arr.flags.c_contiguous and not arr.flags.writeable:
        return arr
    # private copy, so the caller's buffer stays writable and cannot alias ours
    arr = np.array(arr, dtype=np.uint8, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ToricLattice:
    d: int

    def __post_init__(self) -> None:
        if not isinstance(self.d, (int, np.integer)) or self.d < 3 or self.d % 2 == 0:
            raise ValueError(f"lattice dimension must be an odd integer >= 3, got {self.d!r}")

    @property
    def n_qubits(self) -> int:
        return 2 * self.d * self.d

    @property
    def center(self) -> tuple[int, int]:
        return self.d // 2, self.d // 2

    def qubit(self, orientation: int, r: int, c: int) -> int:
        d = self.d
        return orientation * d * d + (r % d) * d + (c % d)

    def edge(self, q: int) -> tuple[int, int, int]:
        """Inverse of :meth:`qubit`: (orientation, r, c)."""
        self.check_qubit(q)
        d2 = self.d * self.d
        o, rest = divmod(int(q), d2)
        r, c = divmod(rest, self.d)
        return o, r, c

    def check_qubit(self, q: int) -> None:
        if not 0 <= q < self.n_qubits:
            raise PreconditionError(f"qubit index {q} out of range [0, {self.n_qubits})")

    def boundary(self, r: int, c: int) -> tuple[int, int, int, int]:
        """Edges (up, down, left, right) of plaquette (r, c)."""
        return (
            self.qubit(HORIZONTAL, r, c),
            self.qubit(HORIZONTAL, r + 1, c),
            self.qubit(VERTICAL, r, c),
            self.qubit(VERTICAL, r, c + 1),
        )

    def plaquettes_of(self, q: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """The two plaquettes sharing edge q."""
        o, r, c = self.edge(q)
        d = self.d
        if o == HORIZONTAL:
            return ((r - 1) % d, c), (r, c)
        return (r, (c - 1) % d), (r, c)

    def star(self, r: int, c: int) -> tuple[int, int, int, int]:
        """Edges meeting at the vertex on the top-left corner of plaquette (r, c).

        Flipping all four is the smallest closed loop of the dual lattice: it
        leaves every plaquette check unchanged and is homologically trivial.
        """
        return (
            self.qubit(HORIZONTAL, r, c - 1),
            self.qubit(HORIZONTAL, r, c),
            self.qubit(VERTICAL, r - 1, c),
            self.qubit(VERTICAL, r, c),
        )

    def logical_loop(self, horizontal: bool, offset: int = 0) -> np.ndarray:
        """Flip vector of a straight non-trivial loop.

        ``horizontal=True`` flips every vertical edge in row ``offset``, moving a
        defect once around the torus along the columns.
        """
        flips = np.zeros(self.n_qubits, dtype=np.uint8)
        d = self.d
        for k in range(d):
            if horizontal:
                flips[self.qubit(VERTICAL, offset, k)] = 1
            else:
                flips[self.qubit(HORIZONTAL, k, offset)] = 1
        return flips


@dataclass(frozen=True, eq=False)
class ErrorState:
    d: int
    flips: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        flips = _frozen(self.flips)
        if flips.shape != (2 * self.d * self.d,):
            raise ValueError(f"flip vector of shape {flips.shape} does not match d={self.d}")
        object.__setattr__(self, "flips", flips)

    @classmethod
    def empty(cls, d: int) -> "ErrorState":
        return cls(d, np.zeros(2 * d * d, dtype=np.uint8))

    @classmethod
    def from_indices(cls, d: int, indices: Iterable[int]) -> "ErrorState":
        flips = np.zeros(2 * d * d, dtype=np.uint8)
        for q in indices:
            flips[q] ^= 1
        return cls(d, flips)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ErrorState):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.flips, other.flips)

    def __hash__(self) -> int:
        return hash((self.d, self.flips.tobytes()))

    def __xor__(self, other: "ErrorState") -> "ErrorState":
        if self.d != other.d:
            raise ValueError("cannot combine error states of different size")
        return ErrorState(self.d, self.flips ^ other.flips)

    @property
    def weight(self) -> int:
        return int(self.flips.sum())

    def indices(self) -> list[int]:
        return np.flatnonzero(self.flips).tolist()

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "flips": self.indices()})

    @classmethod
    def from_json(cls, text: str) -> "ErrorState":
        obj = json.loads(text)
        return cls.from_indices(obj["d"], obj["flips"])


@dataclass(frozen=True, eq=False)
class Syndrome:
    defects: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        defects = _frozen(self.defects)
        if defects.ndim != 2 or defects.shape[0] != defects.shape[1]:
            raise ValueError(f"syndrome must be a square matrix, got shape {defects.shape}")
        object.__setattr__(self, "defects", defects)

    @property
    def d(self) -> int:
        return self.defects.shape[0]

    @property
    def count(self) -> int:
        return int(self.defects.sum())

    @property
    def is_terminal(self) -> bool:
        return not self.defects.any()

    def coords(self) -> list[tuple[int, int]]:
        """Defect positions in row-major order."""
        rs, cs = np.nonzero(self.defects)
        return list(zip(rs.tolist(), cs.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Syndrome):
            return NotImplemented
        return np.array_equal(self.defects, other.defects)

    def __hash__(self) -> int:
        return hash(self.defects.tobytes())

    @classmethod
    def from_coords(cls, d: int, coords: Sequence[Sequence[int]]) -> "Syndrome":
        grid = np.zeros((d, d), dtype=np.uint8)
        for r, c in coords:
            grid[r % d, c % d] ^= 1
        return cls(grid)

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "defects": [list(rc) for rc in self.coords()]})

    @classmethod
    def from_json(cls, text: str) -> "Syndrome":
        obj = json.loads(text)
        return cls.from_coords(obj["d"], obj["defects"])


@dataclass(frozen=True)
class HomologyClass:
    h_parity: int
    v_parity: int

    @property
    def trivial(self) -> bool:
        return self.h_parity == 0 and self.v_parity == 0


def syndrome_array(d: int, flips: np.ndarray) -> np.ndarray:
    """Plaquette parities of a raw flip vector, as a d x d uint8 array."""
    h = flips[: d * d].reshape(d, d)
    v = flips[d * d :].reshape(d, d)
    return h ^ np.roll(h, -1, axis=0) ^ v ^ np.roll(v, -1, axis=1)


def sample_errors(lattice: ToricLattice, p: float, rng_seed: int | np.random.Generator) -> ErrorState:
    """I.i.d. bit flips with probability p on every qubit."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"error probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(rng_seed)
    flips = (rng.random(lattice.n_qubits) < p).astype(np.uint8)
    return ErrorState(lattice.d, flips)


def compute_syndrome(lattice: ToricLattice, errs: ErrorState) -> Syndrome:
    return Syndrome(syndrome_array(lattice.d, errs.flips))


def apply_flip(errs: ErrorState, qubit: int) -> ErrorState:
    if not 0 <= qubit < errs.flips.size:
        raise PreconditionError(f"qubit index {qubit} out of range [0, {errs.flips.size})")
    flips = errs.flips.copy()
    flips[qubit] ^= 1
    return ErrorState(errs.d, flips)


def crossing_parities(d: int, flips: np.ndarray, row: int = 0, col: int = 0) -> tuple[int, int]:
    """Parities of flipped edges crossing the column cut ``col`` and row cut ``row``.

    Only meaningful for closed configurations; no syndrome check is done here.
    """
    h = flips[: d * d].reshape(d, d)
    v = flips[d * d :].reshape(d, d)
    return int(v[:, col].sum() & 1), int(h[row, :].sum() & 1)


def homology_class(lattice: ToricLattice, combined: ErrorState) -> HomologyClass:
    if syndrome_array(lattice.d, combined.flips).any():
        raise PreconditionError("homology class is only defined for configurations with empty syndrome")
    h, v = crossing_parities(lattice.d, combined.flips)
    return HomologyClass(h, v)


def is_success(combined: ErrorState) -> bool:
    """True when error plus correction is a product of stabilizers."""
    return homology_class(ToricLattice(combined.d), combined).trivial


def translate(lattice: ToricLattice, errs: ErrorState, dr: int, dc: int) -> ErrorState:
    """Shift every flip by (dr, dc) with periodic wrap."""
    d = lattice.d
    planes = errs.flips.reshape(2, d, d)
    shifted = np.roll(planes, (dr, dc), axis=(1, 2))
    return ErrorState(d, shifted.reshape(-1))
