"""Graph attention network over the tripartite graph.

Four attention rounds (Q<-V, V<-Q, C<-V, V<-C) with GATv2-style scoring, then a
two-hidden-layer MLP producing one logit per binary variable.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import torch
from scipy.special import expit
from torch import nn

from ..graph import F_C, F_Q, F_V, TripartiteGraph

DTYPE = torch.float64


@dataclass(frozen=True)
class ModelConfig:
    hidden: int = 32
    heads: int = 4
    f_v: int = F_V
    f_c: int = F_C
    f_q: int = F_Q
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class GraphTensors:
    v: torch.Tensor
    c: torch.Tensor
    q: torch.Tensor
    qv_q: torch.Tensor
    qv_v: torch.Tensor
    qv_attr: torch.Tensor
    cv_c: torch.Tensor
    cv_v: torch.Tensor
    cv_attr: torch.Tensor
    binary_idx: torch.Tensor


def to_tensors(graph: TripartiteGraph) -> GraphTensors:
    cv = graph.cv_edges
    coef = cv[:, 2] if len(cv) else np.zeros(0)
    scale = float(np.max(np.abs(coef), initial=0.0)) or 1.0
    qv = graph.qv_edges.reshape(-1, 2)
    return GraphTensors(
        v=torch.as_tensor(graph.v_feats, dtype=DTYPE),
        c=torch.as_tensor(graph.c_feats, dtype=DTYPE),
        q=torch.as_tensor(graph.q_feats, dtype=DTYPE),
        qv_q=torch.as_tensor(qv[:, 0], dtype=torch.long),
        qv_v=torch.as_tensor(qv[:, 1], dtype=torch.long),
        qv_attr=torch.ones(len(qv), dtype=DTYPE),
        cv_c=torch.as_tensor(cv[:, 0].astype(np.int64), dtype=torch.long),
        cv_v=torch.as_tensor(cv[:, 1].astype(np.int64), dtype=torch.long),
        cv_attr=torch.as_tensor(coef / scale, dtype=DTYPE),
        binary_idx=torch.as_tensor(np.flatnonzero(graph.binary_mask), dtype=torch.long),
    )


class AttentionRound(nn.Module):
    """Destination nodes attend over their source neighbours (GATv2 scoring).

    score_e = a_h . LeakyReLU(W_q x_dst + W_k x_src + coef_e * u_k), softmax over
    each destination's incoming edges; nodes with no incoming edge are returned unchanged.
    """

    def __init__(self, hidden: int, heads: int):
        super().__init__()
        if hidden % heads:
            raise ValueError("hidden size must be divisible by the number of heads")
        self.heads = heads
        self.head_dim = hidden // heads
        self.query = nn.Linear(hidden, hidden, bias=False, dtype=DTYPE)
        self.key = nn.Linear(hidden, hidden, bias=False, dtype=DTYPE)
        self.value = nn.Linear(hidden, hidden, bias=False, dtype=DTYPE)
        self.edge_key = nn.Parameter(torch.empty(hidden, dtype=DTYPE))
        self.edge_value = nn.Parameter(torch.empty(hidden, dtype=DTYPE))
        self.attn = nn.Parameter(torch.empty(heads, self.head_dim, dtype=DTYPE))
        self.out = nn.Linear(hidden, hidden, dtype=DTYPE)
        self.score_act = nn.LeakyReLU(0.2)
        self.out_act = nn.ReLU()
        bound = 1.0 / self.head_dim**0.5
        for p in (self.edge_key, self.edge_value, self.attn):
            nn.init.uniform_(p, -bound, bound)

    def forward(self, x_src, x_dst, src, dst, attr):
        n_dst, hidden = x_dst.shape
        if len(src) == 0 or n_dst == 0:
            return x_dst
        E = len(src)
        shape = (E, self.heads, self.head_dim)
        s = self.score_act(self.query(x_dst)[dst] + self.key(x_src)[src] + attr[:, None] * self.edge_key)
        e = (s.view(shape) * self.attn).sum(-1)
        # softmax is shift invariant, so the per-destination max needs no gradient
        e_max = torch.full((n_dst, self.heads), -torch.inf, dtype=DTYPE).scatter_reduce(
            0, dst[:, None].expand(E, self.heads), e.detach(), reduce="amax"
        )
        ex = torch.exp(e - e_max[dst])
        denom = torch.zeros(n_dst, self.heads, dtype=DTYPE).index_add(0, dst, ex)
        alpha = ex / denom[dst]
        val = (self.value(x_src)[src] + attr[:, None] * self.edge_value).view(shape)
        agg = torch.zeros(n_dst, self.heads, self.head_dim, dtype=DTYPE).index_add(0, dst, alpha[..., None] * val)
        upd = self.out_act(self.out(agg.reshape(n_dst, hidden)))
        has_nbr = torch.zeros(n_dst, dtype=DTYPE).index_add(0, dst, torch.ones(E, dtype=DTYPE)) > 0
        return torch.where(has_nbr[:, None], x_dst + upd, x_dst)


class SolutionPredictor(nn.Module):
    def __init__(self, config: ModelConfig = ModelConfig()):
        super().__init__()
        self.config = config
        h = config.hidden
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(config.seed)
            self.embed_v = nn.Sequential(nn.Linear(config.f_v, h, dtype=DTYPE), nn.ReLU())
            self.embed_c = nn.Sequential(nn.Linear(config.f_c, h, dtype=DTYPE), nn.ReLU())
            self.embed_q = nn.Sequential(nn.Linear(config.f_q, h, dtype=DTYPE), nn.ReLU())
            self.q_from_v = AttentionRound(h, config.heads)
            self.v_from_q = AttentionRound(h, config.heads)
            self.c_from_v = AttentionRound(h, config.heads)
            self.v_from_c = AttentionRound(h, config.heads)
            self.head = nn.Sequential(
                nn.Linear(h, h, dtype=DTYPE), nn.ReLU(),
                nn.Linear(h, h, dtype=DTYPE), nn.ReLU(),
                nn.Linear(h, 1, dtype=DTYPE),
            )

    def forward(self, g: GraphTensors) -> torch.Tensor:
        cfg = self.config
        if g.v.shape[1] != cfg.f_v or g.c.shape[1] != cfg.f_c or g.q.shape[1] != cfg.f_q:
            raise ValueError("graph feature dimensions do not match the model")
        v1 = self.embed_v(g.v)
        c1 = self.embed_c(g.c)
        q1 = self.embed_q(g.q)
        q2 = self.q_from_v(v1, q1, g.qv_v, g.qv_q, g.qv_attr)
        v2 = self.v_from_q(q2, v1, g.qv_q, g.qv_v, g.qv_attr)
        c2 = self.c_from_v(v2, c1, g.cv_v, g.cv_c, g.cv_attr)
        v3 = self.v_from_c(c2, v2, g.cv_c, g.cv_v, g.cv_attr)
        return self.head(v3[g.binary_idx]).squeeze(-1)


def param_count(config: ModelConfig) -> int:
    h = config.hidden
    embed = (config.f_v + config.f_c + config.f_q) * h + 3 * h
    per_round = 3 * h * h + 2 * h + h + h * h + h  # q,k,v; edge key/value; attention; out
    mlp = 2 * (h * h + h) + h + 1
    return embed + 4 * per_round + mlp


def flatten_params(model: nn.Module) -> np.ndarray:
    return torch.nn.utils.parameters_to_vector(model.parameters()).detach().numpy().copy()


def load_flat_params(model: nn.Module, flat) -> None:
    vec = torch.as_tensor(np.asarray(flat, dtype=np.float64))
    if vec.numel() != sum(p.numel() for p in model.parameters()):
        raise ValueError("flat parameter vector has the wrong length")
    with torch.no_grad():
        torch.nn.utils.vector_to_parameters(vec, model.parameters())


def predict_logits(model: SolutionPredictor, graph: TripartiteGraph | GraphTensors) -> np.ndarray:
    g = to_tensors(graph) if isinstance(graph, TripartiteGraph) else graph
    with torch.no_grad():
        return model(g).numpy().copy()


def predict_prob(z):
    return expit(np.asarray(z, dtype=float))


def predict_signed(z):
    return np.tanh(np.asarray(z, dtype=float))
