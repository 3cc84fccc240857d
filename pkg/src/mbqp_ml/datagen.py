"""Training-data collection by Randomized Relax-Search, negative filtering and U-sets."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import bnb
from .instance import MbqpInstance, Solution, fix_variables, make_solution, minmax_normalize, round_half_up, softmax_weights
from .relaxation import least_fractional, solve_relaxation
from .rng import SplitMix64, derive_seed


@dataclass
class SampleSet:
    instance: MbqpInstance
    positives: list[Solution]
    negatives: list[Solution]
    u_sets: dict[int, np.ndarray] = field(default_factory=dict)
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def instance_name(self) -> str:
        return self.instance.name

    def normalized_objectives(self) -> tuple[np.ndarray, np.ndarray]:
        """Positive and negative objectives min-max scaled over S+ and S- together."""
        pos = np.array([s.objective for s in self.positives])
        neg = np.array([s.objective for s in self.negatives])
        allv = np.concatenate([pos, neg])
        lo, hi = float(allv.min()), float(allv.max())
        return minmax_normalize(pos, lo, hi), minmax_normalize(neg, lo, hi) if len(neg) else neg

    def to_dict(self, instance_ref: str | None = None) -> dict:
        return {
            "instance": instance_ref if instance_ref is not None else self.instance.to_dict(),
            "positives": [s.to_dict() for s in self.positives],
            "negatives": [s.to_dict() for s in self.negatives],
            "u_sets": {str(k): v.tolist() for k, v in sorted(self.u_sets.items())},
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "SampleSet":
        ref = d["instance"]
        if isinstance(ref, str):
            path = Path(ref) if base_dir is None or Path(ref).is_absolute() else Path(base_dir) / ref
            inst = MbqpInstance.load(path)
        else:
            inst = MbqpInstance.from_dict(ref)
        pos = [make_solution(inst, s["x"]) for s in d["positives"]]
        neg = [make_solution(inst, s["x"]) for s in d["negatives"]]
        u = {int(k): np.asarray(v, dtype=np.int64) for k, v in d["u_sets"].items()}
        return cls(inst, pos, neg, u, np.asarray(d["weights"], dtype=float))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "SampleSet":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), base_dir=path.parent)


def _dedup(solutions: Iterable[Solution]) -> list[Solution]:
    seen, out = set(), []
    for s in solutions:
        k = s.key()
        if k not in seen:
            seen.add(k)
            out.append(s)
    return out


def randomized_relax_search(
    inst: MbqpInstance,
    relax_budget: int = 5000,
    node_budget: int = 100_000,
    K: int = 10,
    p1: float = 0.9,
    p2: float = 0.7,
    seed: int = 0,
) -> tuple[list[Solution], list[Solution]]:
    """Best/worst solutions of K random partial fixings of the least fractional binaries.

    Subproblem k fixes a uniform random ``floor(p2*|B|)``-subset of the
    ``floor(p1*|B|)`` least fractional binaries to their rounded relaxation values
    and solves the rest with branch-and-bound. Subproblems without a feasible
    point are skipped.
    """
    nb = len(inst.binary)
    if nb == 0:
        raise ValueError("instance has no binary variables")
    if not (0 < p2 < p1 <= 1):
        raise ValueError("need 0 < p2 < p1 <= 1")
    if K < 1:
        raise ValueError("K must be >= 1")
    relax = solve_relaxation(inst, relax_budget)
    cand = least_fractional(relax.x_bar, inst.binary, int(math.floor(p1 * nb)))
    n_fix = min(len(cand), int(math.floor(p2 * nb)))
    rounded = round_half_up(relax.x_bar).clip(0, 1).astype(int)

    best, worst = [], []
    for k in range(K):
        rng = SplitMix64(derive_seed(seed, k))
        chosen = sorted(int(cand[i]) for i in rng.sample(len(cand), n_fix))
        sub = fix_variables(inst, {j: int(rounded[j]) for j in chosen})
        res = bnb.solve(sub, node_budget, x_hint=relax.x_bar)
        if res.best is None:
            continue
        best.append(make_solution(inst, res.best.x))
        worst.append(make_solution(inst, res.worst.x))
    return _dedup(best), _dedup(worst)


def filter_negatives(s_plus: Sequence[Solution], s_minus: Sequence[Solution]) -> list[Solution]:
    """Negatives strictly worse than the worst positive."""
    if not s_plus:
        raise ValueError("S+ must be non-empty")
    v_worst = max(s.objective for s in s_plus)
    return [s for s in s_minus if s.objective > v_worst]


def compute_u_set(x_plus: Solution, s_minus: Sequence[Solution], binary: Sequence[int]) -> np.ndarray:
    """Binary indices on which every negative agrees with the positive.

    With no negatives every index trivially agrees, so U = B.
    """
    binary = np.asarray(binary, dtype=np.int64)
    xp = x_plus.x[binary]
    agree = np.ones(len(binary), dtype=bool)
    for s in s_minus:
        agree &= s.x[binary] == xp
    return binary[agree]


def build_sample_set(inst: MbqpInstance, s_plus: Sequence[Solution], s_minus: Sequence[Solution]) -> SampleSet:
    pos = _dedup(s for s in s_plus if s.feasible)
    if not pos:
        raise ValueError("no feasible positive solutions")
    pos.sort(key=lambda s: s.objective)
    neg = filter_negatives(pos, _dedup(s_minus))
    ss = SampleSet(inst, pos, neg)
    ss.u_sets = {k: compute_u_set(p, neg, inst.binary) for k, p in enumerate(pos)}
    ss.weights = softmax_weights(ss.normalized_objectives()[0])
    return ss


def collect(inst: MbqpInstance, **kwargs) -> SampleSet:
    s_plus, s_minus = randomized_relax_search(inst, **kwargs)
    return build_sample_set(inst, s_plus, s_minus)


def dataset_stats(sets: Sequence[SampleSet]) -> dict[str, float]:
    if not sets:
        raise ValueError("empty dataset")
    frac = []
    for ss in sets:
        nb = len(ss.instance.binary)
        frac.append(np.mean([len(ss.u_sets[k]) / nb for k in range(len(ss.positives))]))
    return {
        "mean_num_positives": float(np.mean([len(ss.positives) for ss in sets])),
        "mean_best_objective": float(np.mean([min(s.objective for s in ss.positives) for ss in sets])),
        "frac_U": float(np.mean(frac)),
    }
