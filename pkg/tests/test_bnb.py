import itertools

import numpy as np
import pytest

from mbqp_ml import MbqpInstance, fix_variables
from mbqp_ml.bnb import InfeasibleError, enumerate_exact, interval_bound, solve
from mbqp_ml.generators import GenConfig, generate

from oracles import brute_force, dense_objective, random_instance


def test_positive_costs_give_zero():
    n = 6
    inst = MbqpInstance(
        n=n, H=[[0, 1, 2.0], [2, 3, 1.0], [4, 4, 3.0]], c=np.arange(1, n + 1, dtype=float),
        A=[], b=[], binary=range(n), lb=np.zeros(n), ub=np.ones(n),
    )
    res = solve(inst, 1000)
    assert res.proven_optimal and res.best.objective == 0.0 and not res.best.x.any()


def test_fully_fixed_instance():
    rng = np.random.default_rng(0)
    inst = random_instance(rng, 5)
    sub = fix_variables(inst, {j: 0 for j in range(5)})
    res = solve(sub, 10)
    assert res.best.x.tolist() == res.worst.x.tolist() == [0.0] * 5
    assert res.proven_optimal and res.nodes_explored == 1


@pytest.mark.parametrize("seed", range(50))
def test_matches_enumeration(seed):
    rng = np.random.default_rng(100 + seed)
    inst = random_instance(rng, int(rng.integers(4, 11)), m=int(rng.integers(0, 3)))
    best, worst = enumerate_exact(inst)
    ref, _, ref_worst = brute_force(inst)
    assert best.objective == ref and worst.objective == ref_worst
    res = solve(inst, 10**6)
    assert res.proven_optimal and res.best.objective == ref
    assert res.best.objective <= res.worst.objective
    objs = [v for _, v in res.trajectory]
    assert all(a > b for a, b in zip(objs, objs[1:]))
    ts = [t for t, _ in res.trajectory]
    assert ts == sorted(ts) and res.trajectory[-1][1] == res.best.objective


def test_cbqp_k2_combinatorial():
    inst = generate(GenConfig("cbqp", n=8, density=0.5, seed=3, family_params={"k": 2}))
    pairs = []
    for i, j in itertools.combinations(range(8), 2):
        x = np.zeros(8)
        x[[i, j]] = 1
        pairs.append(dense_objective(inst.H, inst.c, x))
    best, worst = enumerate_exact(inst)
    assert best.objective == min(pairs) and worst.objective == max(pairs)


def test_enumerate_tiny():
    inst = MbqpInstance(n=1, H=[], c=[1.0], A=[], b=[], binary=[0], lb=[0], ub=[1])
    best, worst = enumerate_exact(inst)
    assert best.x.tolist() == [0.0] and best.objective == 0.0
    assert worst.x.tolist() == [1.0] and worst.objective == 1.0


def test_enumerate_infeasible_fixing():
    inst = generate(GenConfig("wflop", n=16, seed=1, family_params={"grid_w": 4}))
    sub = fix_variables(inst, {0: 1, 1: 1})
    with pytest.raises(InfeasibleError):
        enumerate_exact(sub)
    assert solve(sub, 10**5).best is None


def test_enumerate_limit():
    inst = generate(GenConfig("cbqp", n=21, seed=0))
    with pytest.raises(ValueError):
        enumerate_exact(inst)


def test_rejects_free_continuous():
    inst = MbqpInstance(n=2, H=[], c=[1.0, 1.0], A=[], b=[], binary=[0], lb=[0, 0], ub=[1, 2])
    with pytest.raises(ValueError):
        solve(inst, 10)
    # a continuous variable pinned by its bounds is fine
    pinned = inst.replace_bounds(np.array([0.0, 2.0]), np.array([1.0, 2.0]))
    assert solve(pinned, 10).best.objective == 2.0


@pytest.mark.parametrize("seed", range(8))
def test_interval_bound_valid_on_partial_fixings(seed):
    """Every partial fixing: bound <= exact minimum of the (constraint-free) subtree."""
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 7, m=0)
    for _ in range(15):
        k = int(rng.integers(0, 8))
        fixed = rng.choice(7, k, replace=False)
        sub = fix_variables(inst, {int(j): int(rng.integers(0, 2)) for j in fixed})
        assert interval_bound(sub) <= brute_force(sub)[0] + 1e-9


def test_interval_bound_hand_value():
    # free pair with H01 = -3, c = (2, -1), H00 = -4: bound = min(0,2-4) + min(0,-1) + min(0,-6)
    inst = MbqpInstance(n=2, H=[[0, 1, -3.0], [0, 0, -4.0]], c=[2.0, -1.0], A=[], b=[], binary=[0, 1], lb=[0, 0], ub=[1, 1])
    assert interval_bound(inst) == -9.0


def test_budget_and_determinism():
    inst = generate(GenConfig("cbqp", n=24, seed=9))
    a, b = solve(inst, 300), solve(inst, 300)
    assert a.nodes_explored == 300 and not a.proven_optimal
    assert a.to_dict() == b.to_dict()
    assert a.trajectory, "a depth-first dive reaches a leaf within the budget"


def test_to_dict_shape():
    rng = np.random.default_rng(2)
    d = solve(random_instance(rng, 5), 100).to_dict()
    assert set(d) == {"best", "worst", "trajectory", "nodes_explored", "proven_optimal"}
