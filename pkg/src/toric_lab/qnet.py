"""Convolutional Q-network on perspective grids, written directly in numpy.

Convolutions wrap around (the grid is a torus) and use stride with ceiling
output size, so ``n -> ceil(n / stride)`` and a 1x1 map stays 1x1.  Activations
are kept channel-last: a batch of feature maps has shape (B, positions, C).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

DEFAULT_CONV = ((512, 3, 2), (256, 3, 2), (256, 3, 2))
DEFAULT_FC = (256, 128, 64, 32)


@dataclass(frozen=True)
class QNetworkConfig:
    d: int
    conv_specs: tuple[tuple[int, int, int], ...] = DEFAULT_CONV
    fc_sizes: tuple[int, ...] = DEFAULT_FC
    outputs: int = 4
    dtype: str = "float64"

    def __post_init__(self) -> None:
        object.__setattr__(self, "conv_specs", tuple(tuple(int(x) for x in s) for s in self.conv_specs))
        object.__setattr__(self, "fc_sizes", tuple(int(x) for x in self.fc_sizes))
        if self.outputs != 4:
            raise ValueError("the output layer must have exactly 4 units (one per plaquette edge)")
        for filters, kernel, stride in self.conv_specs:
            if kernel % 2 == 0 or filters < 1 or stride < 1:
                raise ValueError(f"invalid conv layer spec {(filters, kernel, stride)}")
        if self.dtype not in ("float64", "float32"):
            raise ValueError(f"unsupported dtype {self.dtype!r}")

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "conv_specs": [list(s) for s in self.conv_specs],
            "fc_sizes": list(self.fc_sizes),
            "outputs": self.outputs,
            "dtype": self.dtype,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "QNetworkConfig":
        return cls(
            d=int(obj["d"]),
            conv_specs=tuple(tuple(s) for s in obj.get("conv_specs", DEFAULT_CONV)),
            fc_sizes=tuple(obj.get("fc_sizes", DEFAULT_FC)),
            outputs=int(obj.get("outputs", 4)),
            dtype=obj.get("dtype", "float64"),
        )


@dataclass
class QNetworkParams:
    """Weights and biases in layer order: conv layers, hidden fc layers, output."""

    config: QNetworkConfig
    tensors: list[np.ndarray]

    def copy(self) -> "QNetworkParams":
        return QNetworkParams(self.config, [t.copy() for t in self.tensors])

    @property
    def count(self) -> int:
        return sum(t.size for t in self.tensors)

    def all_finite(self) -> bool:
        return all(np.isfinite(t).all() for t in self.tensors)


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: QNetworkParams, lr: float = 1e-4, beta1: float = 0.9, beta2: float = 0.999) -> "AdamState":
        return cls(
            m=[np.zeros_like(t) for t in params.tensors],
            v=[np.zeros_like(t) for t in params.tensors],
            lr=lr,
            beta1=beta1,
            beta2=beta2,
        )


def _gather_table(n: int, kernel: int, stride: int) -> tuple[np.ndarray, int]:
    """Flat input positions read by each (output position, kernel tap)."""
    m = -(-n // stride)
    half = kernel // 2
    out = np.empty((m * m, kernel * kernel), dtype=np.intp)
    for i in range(m):
        for j in range(m):
            for ki in range(kernel):
                for kj in range(kernel):
                    r = (stride * i + ki - half) % n
                    c = (stride * j + kj - half) % n
                    out[i * m + j, ki * kernel + kj] = r * n + c
    return out, m


class QNetwork:
    """Layer geometry for a config; stateless with respect to parameters."""

    def __init__(self, config: QNetworkConfig):
        self.config = config
        self.dtype = np.dtype(config.dtype)
        self.tables = []
        self.scatter = []
        n, channels = config.d, 1
        self.shapes: list[tuple[int, ...]] = []
        for filters, kernel, stride in config.conv_specs:
            table, m = _gather_table(n, kernel, stride)
            # dense adjoint of the gather, used to route gradients back to inputs
            s = np.zeros((n * n, table.size), dtype=self.dtype)
            s[table.reshape(-1), np.arange(table.size)] = 1.0
            self.tables.append(table)
            self.scatter.append(s)
            self.shapes += [(kernel * kernel * channels, filters), (filters,)]
            n, channels = m, filters
        self.flat_size = n * n * channels
        width = self.flat_size
        for size in config.fc_sizes + (config.outputs,):
            self.shapes += [(width, size), (size,)]
            width = size
        self.n_conv = len(config.conv_specs)

    def parameter_count(self) -> int:
        return sum(math.prod(s) for s in self.shapes)

    def init_params(self, seed: int | np.random.Generator) -> QNetworkParams:
        """He-style uniform fan-in initialisation, zero biases."""
        rng = np.random.default_rng(seed)
        tensors = []
        for wshape, bshape in zip(self.shapes[::2], self.shapes[1::2]):
            limit = math.sqrt(6.0 / wshape[0])
            tensors.append(rng.uniform(-limit, limit, size=wshape).astype(self.dtype))
            tensors.append(np.zeros(bshape, dtype=self.dtype))
        return QNetworkParams(self.config, tensors)

    def zero_params(self) -> QNetworkParams:
        return QNetworkParams(self.config, [np.zeros(s, dtype=self.dtype) for s in self.shapes])

    def _prepare(self, params: QNetworkParams, grids) -> np.ndarray:
        if params.config != self.config:
            raise ValueError("parameters were built for a different network config")
        x = np.asarray(grids)
        d = self.config.d
        if x.shape[-2:] != (d, d) or x.ndim not in (2, 3):
            raise ValueError(f"expected grid(s) of shape ({d}, {d}), got {x.shape}")
        return x.reshape(-1, d * d, 1).astype(self.dtype)

    def _forward(self, params: QNetworkParams, x: np.ndarray, keep: bool):
        t = params.tensors
        b = x.shape[0]
        cache = []
        h = x
        for li, table in enumerate(self.tables):
            w, bias = t[2 * li], t[2 * li + 1]
            cols = h[:, table, :].reshape(b * table.shape[0], -1)
            z = (cols @ w + bias).reshape(b, table.shape[0], -1)
            h = np.maximum(z, 0.0)
            if keep:
                cache.append((cols, z))
        h = h.reshape(b, -1)
        n_fc = len(self.config.fc_sizes)
        for fi in range(n_fc + 1):
            w, bias = t[2 * (self.n_conv + fi)], t[2 * (self.n_conv + fi) + 1]
            z = h @ w + bias
            if keep:
                cache.append((h, z))
            h = np.maximum(z, 0.0) if fi < n_fc else z
        return h, cache

    def forward(self, params: QNetworkParams, grids) -> np.ndarray:
        """q-values of shape (B, 4); a single d x d grid gives shape (4,)."""
        single = np.ndim(grids) == 2
        q, _ = self._forward(params, self._prepare(params, grids), keep=False)
        return q[0] if single else q

    def backward(self, params: QNetworkParams, grids, actions, targets):
        """Gradient of the batch mean of 0.5 * (target - q(s, a))**2.

        Returns (grads, loss, q_selected).
        """
        x = self._prepare(params, grids)
        actions = np.atleast_1d(np.asarray(actions, dtype=np.intp))
        targets = np.atleast_1d(np.asarray(targets, dtype=self.dtype))
        bsz = x.shape[0]
        if actions.shape != (bsz,) or targets.shape != (bsz,):
            raise ValueError("need exactly one action and one target per grid")
        q, cache = self._forward(params, x, keep=True)
        sel = q[np.arange(bsz), actions]
        resid = targets - sel
        loss = float(0.5 * np.mean(resid**2))

        t = params.tensors
        grads: list[np.ndarray] = [None] * len(t)  # type: ignore[list-item]
        g = np.zeros_like(q)
        g[np.arange(bsz), actions] = -resid / bsz

        n_fc = len(self.config.fc_sizes)
        for fi in range(n_fc, -1, -1):
            h_in, z = cache[self.n_conv + fi]
            if fi < n_fc:
                g = g * (z > 0)
            wi = 2 * (self.n_conv + fi)
            grads[wi] = h_in.T @ g
            grads[wi + 1] = g.sum(axis=0)
            g = g @ t[wi].T

        for li in range(self.n_conv - 1, -1, -1):
            cols, z = cache[li]
            positions = self.tables[li].shape[0]
            g = g.reshape(bsz, positions, -1) * (z > 0)
            g2 = g.reshape(bsz * positions, -1)
            grads[2 * li] = cols.T @ g2
            grads[2 * li + 1] = g2.sum(axis=0)
            if li == 0:
                break
            gcols = (g2 @ t[2 * li].T).reshape(bsz, positions * self.tables[li].shape[1], -1)
            # (n*n, P*K) @ (B, P*K, C) -> (B, n*n, C)
            g = np.matmul(self.scatter[li], gcols)
        return grads, loss, sel


_NETS: dict[QNetworkConfig, QNetwork] = {}


def network_for(config: QNetworkConfig) -> QNetwork:
    net = _NETS.get(config)
    if net is None:
        net = _NETS[config] = QNetwork(config)
    return net


def forward(params: QNetworkParams, persp_grid) -> np.ndarray:
    return network_for(params.config).forward(params, persp_grid)


def backward(params: QNetworkParams, persp_grid, action, target) -> list[np.ndarray]:
    grads, _, _ = network_for(params.config).backward(params, persp_grid, action, target)
    return grads


def adam_step(params: QNetworkParams, grads: list[np.ndarray], opt: AdamState) -> tuple[QNetworkParams, AdamState]:
    """Bias-corrected Adam update, applied in place; returns the same objects."""
    if len(grads) != len(params.tensors):
        raise ValueError("gradient list does not match parameter list")
    for p, g in zip(params.tensors, grads):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
    opt.step += 1
    c1 = 1.0 - opt.beta1**opt.step
    c2 = 1.0 - opt.beta2**opt.step
    for p, g, m, v in zip(params.tensors, grads, opt.m, opt.v):
        _adam_kernel(
            p.reshape(-1), np.ascontiguousarray(g, dtype=p.dtype).reshape(-1), m.reshape(-1), v.reshape(-1),
            opt.beta1, opt.beta2, opt.lr / c1, 1.0 / np.sqrt(c2), opt.eps,
        )
    return params, opt


@numba.njit(cache=True)
def _adam_kernel(p, g, m, v, beta1, beta2, step_size, inv_sqrt_c2, eps):  # pragma: no cover - compiled
    for i in range(p.size):
        gi = g[i]
        mi = beta1 * m[i] + (1.0 - beta1) * gi
        vi = beta2 * v[i] + (1.0 - beta2) * gi * gi
        # decayed moments otherwise drift into subnormals, which run ~40x slower
        if abs(mi) < 1e-30:
            mi = 0.0
        if vi < 1e-60:
            vi = 0.0
        m[i] = mi
        v[i] = vi
        p[i] -= step_size * mi / (np.sqrt(vi) * inv_sqrt_c2 + eps)
