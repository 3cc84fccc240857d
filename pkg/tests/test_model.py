import json
import math
from pathlib import Path

import numpy as np
import pytest
import torch

from mbqp_ml import MbqpInstance
from mbqp_ml.generators import FAMILIES, GenConfig, generate
from mbqp_ml.graph import build_tripartite
from mbqp_ml.neural import (
    ModelConfig, SolutionPredictor, flatten_params, load_flat_params, param_count, predict_logits, predict_prob,
    predict_signed, to_tensors,
)

from oracles import reference_logits

GOLDEN = json.loads((Path(__file__).parent / "data" / "golden_forward.json").read_text())


def _load_named(model, params):
    with torch.no_grad():
        for name, p in model.named_parameters():
            p.copy_(torch.as_tensor(np.asarray(params[name], dtype=float)))


@pytest.mark.parametrize("case", range(len(GOLDEN)))
def test_golden_logits(case):
    g = GOLDEN[case]
    inst = MbqpInstance.from_dict(g["instance"])
    model = SolutionPredictor(ModelConfig(**g["config"]))
    _load_named(model, g["params"])
    z = predict_logits(model, build_tripartite(inst))
    np.testing.assert_allclose(z, g["logits"], rtol=0, atol=1e-10)


def test_reference_reproduces_golden():
    g = GOLDEN[0]
    params = {k: np.asarray(v) for k, v in g["params"].items()}
    z = reference_logits(params, g["config"]["heads"], build_tripartite(MbqpInstance.from_dict(g["instance"])))
    np.testing.assert_allclose(z, g["logits"], rtol=0, atol=1e-12)


def _two_var_params(model):
    """Attention rounds switched off (zero output projection), identity-like embeddings and head."""
    params = {k: np.zeros(tuple(v.shape)) for k, v in model.named_parameters()}
    params["embed_v.0.weight"][0, 0] = 2.0  # h0 = relu(2 * c_norm)
    params["embed_v.0.weight"][1, 0] = -1.0  # h1 = relu(-c_norm + 0.5)
    params["embed_v.0.bias"][1] = 0.5
    params["head.0.weight"][0, 0] = 1.0
    params["head.0.weight"][0, 1] = -3.0
    params["head.0.bias"][0] = 1.0
    params["head.2.weight"][0, 0] = 1.5
    params["head.4.weight"][0, 0] = 2.0
    params["head.4.bias"][0] = -0.25
    return params


def test_hand_computed_two_variables():
    inst = MbqpInstance(n=2, H=[[0, 1, 1.0]], c=[1.0, -0.5], A=[[0, 0, 1.0], [0, 1, 1.0]], b=[1.0],
                        binary=[0, 1], lb=[0, 0], ub=[1, 1])
    model = SolutionPredictor(ModelConfig(hidden=4, heads=2))
    params = _two_var_params(model)
    _load_named(model, params)
    # c_norm = (1, -0.5)
    # var0: h0 = 2, h1 = relu(-0.5) = 0 -> a = relu(2 - 0 + 1) = 3 -> b = 4.5 -> z = 9 - 0.25
    # var1: h0 = 0, h1 = 1 -> a = relu(0 - 3 + 1) = 0 -> b = 0 -> z = -0.25
    expected = [8.75, -0.25]
    np.testing.assert_allclose(predict_logits(model, build_tripartite(inst)), expected, atol=1e-12)
    ref = reference_logits(params, 2, build_tripartite(inst))
    np.testing.assert_allclose(ref, expected, atol=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
def test_permutation_equivariance(family):
    from test_graph import _relabel

    inst = generate(GenConfig(family, n=16, seed=5))
    perm = np.random.default_rng(1).permutation(16)
    model = SolutionPredictor(ModelConfig(hidden=8, heads=2, seed=2))
    z = predict_logits(model, build_tripartite(inst))
    zp = predict_logits(model, build_tripartite(_relabel(inst, perm)))
    np.testing.assert_allclose(zp[perm], z, rtol=0, atol=1e-10)


def test_no_quadratic_graph_is_finite():
    inst = MbqpInstance(n=3, H=[], c=[1.0, -2.0, 0.5], A=[[0, 0, 1.0], [0, 2, 2.0]], b=[2.0],
                        binary=range(3), lb=np.zeros(3), ub=np.ones(3))
    z = predict_logits(SolutionPredictor(ModelConfig(hidden=8, heads=4)), build_tripartite(inst))
    assert z.shape == (3,) and np.all(np.isfinite(z))


def test_logits_only_for_binaries():
    inst = MbqpInstance(n=3, H=[[0, 2, 1.0]], c=[1.0, 1.0, 1.0], A=[], b=[], binary=[0, 2],
                        lb=[0, -1, 0], ub=[1, 1, 1])
    assert predict_logits(SolutionPredictor(), build_tripartite(inst)).shape == (2,)


def test_feature_dimension_mismatch():
    g = to_tensors(build_tripartite(generate(GenConfig("cbqp", n=6, seed=0))))
    with pytest.raises(ValueError):
        SolutionPredictor(ModelConfig(f_v=5))(g)
    with pytest.raises(ValueError):
        SolutionPredictor(ModelConfig(hidden=6, heads=4))


@pytest.mark.parametrize("hidden,heads", [(4, 2), (32, 4), (12, 3)])
def test_param_count_and_flatten_round_trip(hidden, heads):
    model = SolutionPredictor(ModelConfig(hidden=hidden, heads=heads, seed=1))
    flat = flatten_params(model)
    assert flat.size == param_count(model.config)
    twin = SolutionPredictor(ModelConfig(hidden=hidden, heads=heads, seed=9))
    load_flat_params(twin, flat)
    assert flatten_params(twin).tobytes() == flat.tobytes()
    with pytest.raises(ValueError):
        load_flat_params(twin, flat[:-1])


def test_seeded_init_is_deterministic_and_isolated():
    torch.manual_seed(0)
    before = torch.rand(1)
    a = flatten_params(SolutionPredictor(ModelConfig(seed=4)))
    after = torch.rand(1)
    torch.manual_seed(0)
    assert torch.equal(before, torch.rand(1)) and torch.equal(after, torch.rand(1))
    assert np.array_equal(a, flatten_params(SolutionPredictor(ModelConfig(seed=4))))


def test_prediction_maps():
    assert predict_prob(0.0) == 0.5 and predict_signed(0.0) == 0.0
    assert predict_prob(1e4) == 1.0 and predict_signed(1e4) == 1.0
    assert abs(predict_prob(math.log(3)) - 0.75) < 1e-15
    assert predict_prob(-1e4) == 0.0
