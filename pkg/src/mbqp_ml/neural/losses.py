"""Weighted cross-entropy, contrastive and combined losses, and the weighted Brier score.

All losses take logits over the binary variables (in ascending index order) and
0/1 sample matrices restricted to the same variables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from ..datagen import SampleSet
from .model import DTYPE

LOGIT_CLIP = 30.0
LOSS_KINDS = ("wce", "cl", "cl+wce")


def _t(x) -> torch.Tensor:
    return x if isinstance(x, torch.Tensor) else torch.as_tensor(np.asarray(x, dtype=float), dtype=DTYPE)


def temperatures(pos_obj_norm, w: float) -> torch.Tensor:
    """tau(x+) = 1 / exp(obj/w) with normalized objectives; w < 0 gives better positives a lower tau."""
    if w >= 0:
        raise ValueError("temperature scale w must be negative for minimization")
    return torch.exp(-_t(pos_obj_norm) / w)


def _bce(z: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Per-entry negative log-likelihood of 0/1 targets under sigmoid(z)."""
    z = z.clamp(-LOGIT_CLIP, LOGIT_CLIP)
    return -(targets * F.logsigmoid(z) + (1.0 - targets) * F.logsigmoid(-z))


def loss_wce(logits, pos, weights) -> torch.Tensor:
    """-sum_k w_k log p(x+_k | theta), with p factorized over variables."""
    z, pos, w = _t(logits), _t(pos), _t(weights)
    if pos.dim() == 1:
        pos = pos[None]
    if len(w) != len(pos):
        raise ValueError("one weight per positive sample is required")
    if len(pos) == 0:
        raise ValueError("S+ must be non-empty")
    return (w * _bce(z[None], pos).sum(-1)).sum()


def cl_terms(signed, pos, neg, pos_obj_norm, w: float) -> torch.Tensor:
    """Per-positive contrastive terms L+ (one entry per row of ``pos``).

    L+ = -log[exp(x+.p/tau) / sum_neg exp(x~.p/tau)] = logsumexp_neg((x~ - x+).p / tau)
    in the -1/1 encoding. Writing it through the difference x~ - x+ makes every
    coordinate where all negatives agree with x+ contribute exactly zero.
    """
    p, pos, neg = _t(signed), _t(pos), _t(neg)
    if pos.dim() == 1:
        pos = pos[None]
    if neg.dim() == 1:
        neg = neg[None]
    if len(neg) == 0:
        raise ValueError("contrastive loss needs at least one negative sample")
    tau = temperatures(pos_obj_norm, w)
    diff = 2.0 * (neg[None, :, :] - pos[:, None, :])  # (P, N, d), entries in {-2, 0, 2}
    sim = (diff * p).sum(-1) / tau[:, None]
    return torch.logsumexp(sim, dim=1)


def loss_cl(signed, pos, neg, pos_obj_norm, w: float) -> torch.Tensor:
    return cl_terms(signed, pos, neg, pos_obj_norm, w).sum()


def loss_combined(logits, pos, neg, u_mask, weights, pos_obj_norm, lambda_cl: float, w: float) -> torch.Tensor:
    """sum_k [lambda * L+_k + w_k * CE restricted to U_k], CE as a negative log-likelihood.

    With no negatives the contrastive term is dropped and U covers every binary,
    so the positive falls back to plain weighted cross-entropy.
    """
    z, pos, u = _t(logits), _t(pos), _t(u_mask)
    if pos.dim() == 1:
        pos = pos[None]
        u = u[None]
    if u.shape != pos.shape:
        raise ValueError("a U-set mask is required for every positive")
    ce = (_t(weights) * (_bce(z[None], pos) * u).sum(-1)).sum()
    if neg is None or len(neg) == 0:
        return ce
    return lambda_cl * loss_cl(torch.tanh(z), pos, neg, pos_obj_norm, w) + ce


def weighted_brier_terms(logits, pos, weights) -> torch.Tensor:
    """sum_k w_k sum_d (sigmoid(z_d) - x+_kd)^2 for one instance."""
    prob = torch.sigmoid(_t(logits))
    pos = _t(pos)
    if pos.dim() == 1:
        pos = pos[None]
    return (_t(weights) * ((prob[None] - pos) ** 2).sum(-1)).sum()


@dataclass(eq=False)
class SampleTensors:
    """Loss-ready view of a SampleSet, restricted to the binary variables."""

    pos: torch.Tensor
    weights: torch.Tensor
    pos_obj_norm: torch.Tensor
    neg: torch.Tensor | None = None
    u_mask: torch.Tensor | None = None

    @classmethod
    def from_sample_set(cls, ss: SampleSet, loss_kind: str = "cl+wce") -> "SampleTensors":
        if loss_kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {loss_kind!r}")
        B = ss.instance.binary
        pos = _t(np.stack([s.x[B] for s in ss.positives]))
        weights = _t(ss.weights)
        if loss_kind == "wce":
            # WCE only ever sees S+; negatives and U-sets stay untouched
            return cls(pos=pos, weights=weights, pos_obj_norm=torch.zeros(len(pos), dtype=DTYPE))
        pos_norm, _ = ss.normalized_objectives()
        neg = _t(np.stack([s.x[B] for s in ss.negatives])) if ss.negatives else torch.zeros((0, len(B)), dtype=DTYPE)
        u_mask = None
        if loss_kind == "cl+wce":
            if set(ss.u_sets) != set(range(len(ss.positives))):
                raise ValueError("every positive needs a U-set")
            u_mask = np.zeros((len(ss.positives), len(B)))
            pos_in_b = {int(j): k for k, j in enumerate(B)}
            for k, idx in ss.u_sets.items():
                u_mask[k, [pos_in_b[int(j)] for j in idx]] = 1.0
            u_mask = _t(u_mask)
        return cls(pos=pos, weights=weights, pos_obj_norm=_t(pos_norm), neg=neg, u_mask=u_mask)


def instance_loss(logits, st: SampleTensors, loss_kind: str, lambda_cl: float = 1.0, w: float = -0.5) -> torch.Tensor:
    if loss_kind == "wce":
        return loss_wce(logits, st.pos, st.weights)
    if loss_kind == "cl":
        if st.neg is None or len(st.neg) == 0:
            # no contrast available for this instance
            return _t(logits).sum() * 0.0
        return loss_cl(torch.tanh(_t(logits)), st.pos, st.neg, st.pos_obj_norm, w)
    if loss_kind == "cl+wce":
        return loss_combined(logits, st.pos, st.neg, st.u_mask, st.weights, st.pos_obj_norm, lambda_cl, w)
    raise ValueError(f"unknown loss kind {loss_kind!r}")
