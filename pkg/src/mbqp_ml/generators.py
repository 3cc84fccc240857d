"""Seeded generators for the CBQP, QMKP, CQKP and WFLOP benchmark families.

All coefficients come from integer grids drawn with :class:`SplitMix64`, so a
given config serializes to the same bytes everywhere. Maximization families are
negated into minimization form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .instance import MbqpInstance
from .rng import SplitMix64, derive_seed

FAMILIES = ("cbqp", "qmkp", "cqkp", "wflop")

# compass directions used as synthetic wind scenarios (integer vectors, no trig)
_WIND_DIRS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


@dataclass
class GenConfig:
    family: str
    n: int = 50
    density: float = 0.25
    seed: int = 0
    family_params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.family = self.family.lower()
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 < self.density <= 1:
            raise ValueError("density must be in (0, 1]")

    def param(self, key: str, default):
        return self.family_params.get(key, default)


def _pure_binary(n, H, c, A, b, name) -> MbqpInstance:
    return MbqpInstance(
        n=n, H=np.array(H, dtype=float).reshape(-1, 3), c=c,
        A=np.array(A, dtype=float).reshape(-1, 3), b=b,
        binary=range(n), lb=np.zeros(n), ub=np.ones(n), name=name,
    )


def _pair(idx: int, n: int) -> tuple[int, int]:
    """Inverse of the row-major enumeration of pairs i < j."""
    # row i starts at i*n - i*(i+1)/2
    i = int((2 * n - 1 - math.isqrt((2 * n - 1) ** 2 - 8 * idx)) // 2)
    while i * n - i * (i + 1) // 2 > idx:
        i -= 1
    while (i + 1) * n - (i + 1) * (i + 2) // 2 <= idx:
        i += 1
    j = idx - (i * n - i * (i + 1) // 2) + i + 1
    return i, j


def _sparse_pairs(rng: SplitMix64, n: int, density: float) -> list[tuple[int, int]]:
    """round(density * n(n-1)/2) distinct off-diagonal pairs, sorted."""
    total = n * (n - 1) // 2
    k = min(total, max(1, int(math.floor(density * total + 0.5))))
    return sorted(_pair(idx, n) for idx in rng.sample(total, k))


def _cardinality_rows(n: int, k: int, row0: int, equality: bool):
    A = [[row0, j, 1.0] for j in range(n)]
    b = [float(k)]
    if equality:
        A += [[row0 + 1, j, -1.0] for j in range(n)]
        b.append(float(-k))
    return A, b


def gen_cbqp(cfg: GenConfig) -> MbqpInstance:
    """Random indefinite H at the target density with one cardinality equality sum(x) = k."""
    n = cfg.n
    k = int(cfg.param("k", math.ceil(n / 4)))
    if not 0 <= k <= n:
        raise ValueError(f"cardinality k={k} must lie in [0, n={n}]")
    lo, hi = cfg.param("coef_range", (-100, 100))
    rng = SplitMix64(derive_seed(cfg.seed, 1))
    H = []
    for i, j in _sparse_pairs(rng, n, cfg.density):
        v = 0
        while v == 0:
            v = rng.randint(lo, hi)
        H.append([i, j, float(v)])
    c = [float(rng.randint(lo, hi)) for _ in range(n)]
    A, b = _cardinality_rows(n, k, 0, equality=True)
    return _pure_binary(n, H, c, A, b, f"cbqp_n{n}_s{cfg.seed}")


def _profits(rng: SplitMix64, n: int, density: float, hi: int):
    H = [[i, j, -float(rng.randint(1, hi))] for i, j in _sparse_pairs(rng, n, density)]
    c = [-float(rng.randint(1, hi)) for _ in range(n)]
    return H, c


def gen_qmkp(cfg: GenConfig) -> MbqpInstance:
    """Quadratic multidimensional knapsack: max profit s.t. m knapsack rows (negated)."""
    n = cfg.n
    m = int(cfg.param("m", 5))
    ratio = float(cfg.param("capacity_ratio", 0.3))
    rng = SplitMix64(derive_seed(cfg.seed, 2))
    H, c = _profits(rng, n, cfg.density, 100)
    A, b = [], []
    for r in range(m):
        w = [rng.randint(1, 100) for _ in range(n)]
        A += [[r, j, float(w[j])] for j in range(n)]
        # positive and strictly below the total weight: x=0 feasible, x=1 not
        b.append(float(min(sum(w) - 1, max(1, int(ratio * sum(w))))))
    return _pure_binary(n, H, c, A, b, f"qmkp_n{n}_s{cfg.seed}")


def gen_cqkp(cfg: GenConfig) -> MbqpInstance:
    """Quadratic knapsack with one weight row and a cardinality bound sum(x) <= k (negated)."""
    n = cfg.n
    k = int(cfg.param("k", math.ceil(n / 4)))
    if not 0 <= k <= n:
        raise ValueError(f"cardinality k={k} must lie in [0, n={n}]")
    ratio = float(cfg.param("capacity_ratio", 0.3))
    rng = SplitMix64(derive_seed(cfg.seed, 3))
    H, c = _profits(rng, n, cfg.density, 100)
    w = [rng.randint(1, 100) for _ in range(n)]
    A = [[0, j, float(w[j])] for j in range(n)]
    b = [float(min(sum(w) - 1, max(1, int(ratio * sum(w)))))]
    A2, b2 = _cardinality_rows(n, k, 1, equality=False)
    return _pure_binary(n, H, c, A + A2, b + b2, f"cqkp_n{n}_s{cfg.seed}")


def _grid_shape(cfg: GenConfig) -> tuple[int, int]:
    w = cfg.param("grid_w", None)
    h = cfg.param("grid_h", None)
    if w is None and h is None:
        w = math.isqrt(cfg.n)
        while cfg.n % w:
            w -= 1
        h = cfg.n // w
    elif w is None:
        w = cfg.n // int(h)
    elif h is None:
        h = cfg.n // int(w)
    w, h = int(w), int(h)
    if w * h != cfg.n:
        raise ValueError(f"grid {w}x{h} does not match n={cfg.n}")
    return w, h


def gen_wflop(cfg: GenConfig) -> MbqpInstance:
    """Synthetic wind farm layout: cells are candidate turbine sites.

    Objective (min) = -sum_j power_j x_j + sum_{i<j} wake_ij x_i x_j. The wake
    radius is chosen so that the fraction of interacting pairs matches the target
    density; cells closer than ``separation`` cannot both host a turbine.
    """
    n = cfg.n
    gw, gh = _grid_shape(cfg)
    separation = float(cfg.param("separation", 1.5))
    scenarios = int(cfg.param("scenarios", 4))
    max_turbines = int(cfg.param("max_turbines", math.ceil(n / 4)))
    wake_scale = float(cfg.param("wake_scale", 60))
    rng = SplitMix64(derive_seed(cfg.seed, 4))

    cells = [(t % gw, t // gw) for t in range(n)]
    dirs = [_WIND_DIRS[rng.randbelow(len(_WIND_DIRS))] for _ in range(scenarios)]
    raw_w = [rng.randint(1, 10) for _ in range(scenarios)]
    s_weights = [r / sum(raw_w) for r in raw_w]
    power = [float(rng.randint(50, 150)) for _ in range(n)]

    d2 = []
    for i in range(n):
        for j in range(i + 1, n):
            dx, dy = cells[j][0] - cells[i][0], cells[j][1] - cells[i][1]
            d2.append(dx * dx + dy * dy)
    # radius: squared distance at the target density quantile (exact integer order)
    order = sorted(d2)
    n_pairs = len(order)
    q = order[min(n_pairs - 1, max(0, int(math.floor(cfg.density * n_pairs + 0.5)) - 1))]
    radius = math.sqrt(q) + 1.0

    H, A, b = [], [], []
    row = 0
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            sq = d2[idx]
            idx += 1
            dx, dy = cells[j][0] - cells[i][0], cells[j][1] - cells[i][1]
            dist = math.sqrt(sq)
            if dist < separation:
                A += [[row, i, 1.0], [row, j, 1.0]]
                b.append(1.0)
                row += 1
            if sq > q:
                continue
            decay = 1.0 - dist / radius
            val = 0.0
            for (ux, uy), ws in zip(dirs, s_weights):
                # either turbine can sit downstream of the other
                align = abs(dx * ux + dy * uy) / (dist * math.sqrt(ux * ux + uy * uy))
                val += ws * decay * (0.25 + 0.75 * align)
            wake = math.floor(wake_scale * val + 0.5)
            if wake > 0:
                # off-diagonal entry v contributes 2*v*x_i*x_j
                H.append([i, j, wake / 2.0])
    A += [[row, j, 1.0] for j in range(n)]
    b.append(float(max_turbines))
    c = [-p for p in power]
    return _pure_binary(n, H, c, A, b, f"wflop_n{n}_s{cfg.seed}")


_GENERATORS = {"cbqp": gen_cbqp, "qmkp": gen_qmkp, "cqkp": gen_cqkp, "wflop": gen_wflop}


def generate(cfg: GenConfig) -> MbqpInstance:
    return _GENERATORS[cfg.family](cfg)


def offdiag_density(inst: MbqpInstance) -> float:
    pairs = inst.n * (inst.n - 1) // 2
    if not len(inst.H):
        return 0.0
    off = np.count_nonzero((inst.H[:, 0] != inst.H[:, 1]) & (inst.H[:, 2] != 0))
    return off / pairs
