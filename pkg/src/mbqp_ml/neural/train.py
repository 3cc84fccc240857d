"""Gradients, the AdamW training loop, Brier-score model selection and checkpoints."""

from __future__ import annotations

import base64
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from loguru import logger

from ..datagen import SampleSet
from ..graph import build_tripartite
from ..rng import SplitMix64, derive_seed
from .losses import LOSS_KINDS, SampleTensors, instance_loss, weighted_brier_terms
from .model import GraphTensors, ModelConfig, SolutionPredictor, flatten_params, load_flat_params, to_tensors
from .optim import AdamState, adamw_step

LAMBDA_GRID = (1.0, 2.0, 5.0, 7.0)


@dataclass
class TrainConfig:
    loss_kind: str = "cl+wce"
    lambda_cl: float = 1.0
    temperature_w: float = -0.5
    lr: float = 1e-5
    weight_decay: float = 0.01
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    batch_size: int = 16
    epochs: int = 50
    hidden: int = 32
    heads: int = 4
    seed: int = 0

    def __post_init__(self):
        self.loss_kind = self.loss_kind.lower()
        self.betas = tuple(self.betas)
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}")
        if self.temperature_w >= 0:
            raise ValueError("temperature_w must be negative")
        if self.loss_kind == "cl+wce" and self.lambda_cl <= 0:
            raise ValueError("lambda_cl must be positive for the combined loss")

    def model_config(self) -> ModelConfig:
        return ModelConfig(hidden=self.hidden, heads=self.heads, seed=self.seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["betas"] = list(self.betas)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass(eq=False)
class Example:
    graph: GraphTensors
    samples: SampleTensors


def make_examples(sets: Sequence[SampleSet], loss_kind: str) -> list[Example]:
    return [Example(to_tensors(build_tripartite(ss.instance)), SampleTensors.from_sample_set(ss, loss_kind)) for ss in sets]


def batch_loss(model: SolutionPredictor, batch: Sequence[Example], cfg: TrainConfig) -> torch.Tensor:
    total = sum(
        instance_loss(model(ex.graph), ex.samples, cfg.loss_kind, cfg.lambda_cl, cfg.temperature_w) for ex in batch
    )
    return total / len(batch)


def gradient(model: SolutionPredictor, batch: Sequence[Example], cfg: TrainConfig) -> tuple[float, np.ndarray]:
    """Loss and its gradient with respect to the flattened parameters."""
    model.zero_grad(set_to_none=True)
    loss = batch_loss(model, batch, cfg)
    if not torch.isfinite(loss):
        raise FloatingPointError(f"non-finite loss {loss.item()}")
    loss.backward()
    grads = [p.grad if p.grad is not None else torch.zeros_like(p) for p in model.parameters()]
    return float(loss.item()), torch.cat([g.reshape(-1) for g in grads]).numpy().copy()


def weighted_brier(model: SolutionPredictor, examples: Sequence[Example]) -> float:
    """(1/N) sum_i sum_{x+} sum_d w(x+) (p_d - x+_d)^2 over validation instances."""
    if not examples:
        raise ValueError("no validation instances")
    with torch.no_grad():
        total = sum(float(weighted_brier_terms(model(ex.graph), ex.samples.pos, ex.samples.weights)) for ex in examples)
    return total / len(examples)


@dataclass
class TrainResult:
    final: SolutionPredictor
    best: SolutionPredictor
    log: list[dict] = field(default_factory=list)
    best_val_brier: float | None = None


def _clone(model: SolutionPredictor) -> SolutionPredictor:
    twin = SolutionPredictor(model.config)
    load_flat_params(twin, flatten_params(model))
    return twin


def train(
    train_sets: Sequence[SampleSet] | Sequence[Example],
    cfg: TrainConfig,
    val_sets: Sequence[SampleSet] | Sequence[Example] | None = None,
    init: SolutionPredictor | None = None,
) -> TrainResult:
    """Mini-batch AdamW; keeps the parameters with the best validation Brier score."""
    if not train_sets:
        raise ValueError("empty training set")
    data = train_sets if isinstance(train_sets[0], Example) else make_examples(train_sets, cfg.loss_kind)
    val = None
    if val_sets:
        val = val_sets if isinstance(val_sets[0], Example) else make_examples(val_sets, "wce")
    model = _clone(init) if init is not None else SolutionPredictor(cfg.model_config())
    theta = flatten_params(model)
    state = AdamState.zeros(theta.size)
    best, best_score = None, np.inf
    log = []
    for epoch in range(cfg.epochs):
        order = SplitMix64(derive_seed(cfg.seed, 1_000_003, epoch)).sample(len(data), len(data))
        losses = []
        for start in range(0, len(order), cfg.batch_size):
            batch = [data[i] for i in order[start:start + cfg.batch_size]]
            loss, g = gradient(model, batch, cfg)
            theta, state = adamw_step(theta, g, state, cfg.lr, cfg.betas, cfg.eps, cfg.weight_decay)
            load_flat_params(model, theta)
            losses.append(loss)
        entry = {"epoch": epoch, "loss": float(np.mean(losses))}
        if val is not None:
            score = weighted_brier(model, val)
            entry["val_brier"] = score
            if score < best_score:
                best, best_score = _clone(model), score
        log.append(entry)
        logger.debug("epoch {} loss {:.6f} val {}", epoch, entry["loss"], entry.get("val_brier"))
    return TrainResult(
        final=model,
        best=best if best is not None else _clone(model),
        log=log,
        best_val_brier=None if val is None else best_score,
    )


def select_lambda(
    train_sets, val_sets, cfg: TrainConfig, grid: Sequence[float] = LAMBDA_GRID
) -> tuple[float, TrainResult]:
    """Train one combined-loss model per lambda and keep the lowest validation Brier score."""
    data = make_examples(train_sets, "cl+wce") if not isinstance(train_sets[0], Example) else train_sets
    val = make_examples(val_sets, "wce") if not isinstance(val_sets[0], Example) else val_sets
    best_lam, best_res = None, None
    for lam in grid:
        res = train(data, TrainConfig(**{**cfg.to_dict(), "loss_kind": "cl+wce", "lambda_cl": lam}), val)
        if best_res is None or res.best_val_brier < best_res.best_val_brier:
            best_lam, best_res = lam, res
    return best_lam, best_res


# checkpoints ------------------------------------------------------------


def encode_params(flat: np.ndarray) -> str:
    return base64.b64encode(np.asarray(flat, dtype="<f8").tobytes()).decode("ascii")


def decode_params(text: str) -> np.ndarray:
    return np.frombuffer(base64.b64decode(text), dtype="<f8").astype(np.float64)


def save_checkpoint(path, model: SolutionPredictor, train_config: TrainConfig | None = None) -> None:
    flat = flatten_params(model)
    doc = {
        "config": {"model": model.config.to_dict(), "train": None if train_config is None else train_config.to_dict()},
        "flat_params": encode_params(flat),
        "param_count": int(flat.size),
        "seed": model.config.seed,
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> SolutionPredictor:
    doc = json.loads(Path(path).read_text())
    model = SolutionPredictor(ModelConfig(**doc["config"]["model"]))
    flat = decode_params(doc["flat_params"])
    if flat.size != doc["param_count"]:
        raise ValueError("checkpoint parameter count mismatch")
    load_flat_params(model, flat)
    return model
