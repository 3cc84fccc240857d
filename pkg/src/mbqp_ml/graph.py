"""Tripartite constraint / variable / quadratic-term graph encoding of an MBQP."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .instance import MbqpInstance

F_V, F_C, F_Q = 6, 5, 5


@dataclass(eq=False)
class TripartiteGraph:
    v_feats: np.ndarray  # (n, F_V)
    c_feats: np.ndarray  # (m, F_C)
    q_feats: np.ndarray  # (|Q|, F_Q)
    cv_edges: np.ndarray  # (nnz(A), 3): constraint, variable, raw coefficient A_ij
    qv_edges: np.ndarray  # (E_q, 2): quadratic term, variable
    binary_mask: np.ndarray  # (n,) bool

    @property
    def num_vars(self) -> int:
        return len(self.v_feats)

    def to_dict(self) -> dict:
        return {
            "v_feats": self.v_feats.tolist(),
            "c_feats": self.c_feats.tolist(),
            "q_feats": self.q_feats.tolist(),
            "cv_edges": [[int(a), int(b), float(v)] for a, b, v in self.cv_edges.tolist()],
            "qv_edges": self.qv_edges.tolist(),
            "binary_mask": self.binary_mask.astype(int).tolist(),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))


def _scale(x: np.ndarray) -> float:
    s = float(np.max(np.abs(x), initial=0.0))
    return s if s > 0 else 1.0


def build_tripartite(inst: MbqpInstance) -> TripartiteGraph:
    n, m = inst.n, inst.m
    Hc = inst.H[inst.H[:, 2] != 0] if len(inst.H) else inst.H
    qi = Hc[:, 0].astype(np.int64)
    qj = Hc[:, 1].astype(np.int64)
    qv = Hc[:, 2]
    diag = qi == qj
    nq = len(Hc)

    # Q-V edges: two per off-diagonal term, one per diagonal term
    q_idx = np.arange(nq)
    qv_edges = np.concatenate(
        [np.stack([q_idx, qi], axis=1), np.stack([q_idx[~diag], qj[~diag]], axis=1)]
    ).astype(np.int64)
    q_inc = np.bincount(qv_edges[:, 1], minlength=n) if nq else np.zeros(n, dtype=np.int64)
    # distinct quadratic partners per variable
    partners = np.zeros(n)
    if nq:
        off = ~diag
        partners = np.bincount(qi[off], minlength=n) + np.bincount(qj[off], minlength=n)

    ar = inst.A[:, 0].astype(np.int64)
    ac = inst.A[:, 1].astype(np.int64)
    av = inst.A[:, 2]
    col_deg = np.bincount(ac, minlength=n) if len(av) else np.zeros(n)
    row_deg = np.bincount(ar, minlength=m) if len(av) else np.zeros(m)

    v_feats = np.column_stack([
        inst.c / _scale(inst.c),
        col_deg / max(m, 1),
        q_inc / max(nq, 1),
        inst.is_binary.astype(float),
        np.clip(inst.lb, -10.0, 10.0),
        np.clip(inst.ub, -10.0, 10.0),
    ])

    amax = _scale(av)
    abs_sum = np.bincount(ar, weights=np.abs(av), minlength=m) if len(av) else np.zeros(m)
    abs_max = np.zeros(m)
    if len(av):
        np.maximum.at(abs_max, ar, np.abs(av))
    c_feats = np.column_stack([
        inst.b / _scale(inst.b),
        row_deg / n,
        np.divide(abs_sum, np.maximum(row_deg, 1)) / amax,
        abs_max / amax,
        np.ones(m),
    ]) if m else np.zeros((0, F_C))

    hmax = _scale(qv)
    q_feats = np.column_stack([
        qv / hmax,
        np.abs(qv) / hmax,
        np.sign(qv),
        diag.astype(float),
        (partners[qi] + partners[qj]) / (2.0 * n),
    ]) if nq else np.zeros((0, F_Q))

    cv_edges = np.column_stack([ar, ac, av]) if len(av) else np.zeros((0, 3))
    return TripartiteGraph(
        v_feats=v_feats.astype(float),
        c_feats=c_feats.astype(float),
        q_feats=q_feats.astype(float),
        cv_edges=cv_edges.astype(float),
        qv_edges=qv_edges.reshape(-1, 2),
        binary_mask=inst.is_binary.copy(),
    )
