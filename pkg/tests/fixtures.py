"""Builders for small sample sets and models shared by several test modules."""

from __future__ import annotations

import numpy as np

from mbqp_ml import MbqpInstance, make_solution
from mbqp_ml.datagen import SampleSet, build_sample_set
from mbqp_ml.generators import GenConfig, generate
from mbqp_ml.neural import TrainConfig

from oracles import random_instance


def toy_sample_set(rng: np.random.Generator, n: int, n_pos: int = 2, n_neg: int = 3, agree: int = 0) -> SampleSet:
    """Unconstrained instance with random distinct points; the best n_pos are positives.

    ``agree`` coordinates (chosen at random) are forced equal across all points, so
    they end up in every U-set.
    """
    if 2 ** (n - agree) < n_pos + n_neg:
        raise ValueError("not enough distinct points for the requested sample sizes")
    inst = random_instance(rng, n, m=0, integer=False)
    shared = rng.choice(n, agree, replace=False) if agree else np.zeros(0, dtype=int)
    base = rng.integers(0, 2, n)
    seen, pts = set(), []
    while len(pts) < n_pos + n_neg:
        x = rng.integers(0, 2, n)
        x[shared] = base[shared]
        if x.tobytes() not in seen:
            seen.add(x.tobytes())
            pts.append(make_solution(inst, x.astype(float)))
    pts.sort(key=lambda s: s.objective)
    return build_sample_set(inst, pts[:n_pos], pts[n_pos:])


def small_sets(count: int, n: int = 12, seed: int = 0, family: str = "cbqp"):
    from mbqp_ml.datagen import collect

    return [
        collect(generate(GenConfig(family, n=n, density=0.4, seed=seed + s)), relax_budget=800, node_budget=2000, K=5,
                seed=s)
        for s in range(count)
    ]


def tiny_config(kind: str, seed: int = 0, **kw) -> TrainConfig:
    base = dict(loss_kind=kind, lambda_cl=2.0, hidden=4, heads=2, seed=seed, epochs=1, batch_size=4)
    base.update(kw)
    return TrainConfig(**base)
