"""Independent reference implementations used as test oracles.

Nothing here imports the code under test except plain data containers, so a bug
in the package cannot leak into the expected values.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from mbqp_ml import MbqpInstance


def dense_objective(H_list, c, x) -> float:
    """x'Hx + c'x by explicit double loop over the stored triangle."""
    total = 0.0
    for i, j, v in H_list:
        i, j = int(i), int(j)
        total += v * x[i] * x[j] if i == j else 2.0 * v * x[i] * x[j]
    return total + sum(ci * xi for ci, xi in zip(c, x))


def brute_force(inst: MbqpInstance, tol: float = 1e-6):
    """(best_obj, best_x, worst_obj) over all 0/1 completions, via itertools."""
    free = [j for j in range(inst.n) if inst.lb[j] < inst.ub[j]]
    A = np.zeros((inst.m, inst.n))
    for r, k, v in inst.A:
        A[int(r), int(k)] = v
    best, best_x, worst = math.inf, None, -math.inf
    for bits in itertools.product((0.0, 1.0), repeat=len(free)):
        x = inst.lb.astype(float).copy()
        for j, b in zip(free, bits):
            x[j] = b
        if inst.m and np.any(A @ x > inst.b + tol):
            continue
        v = dense_objective(inst.H, inst.c, x)
        if v < best:
            best, best_x = v, x
        worst = max(worst, v)
    return best, best_x, worst


def random_instance(rng: np.random.Generator, n: int, m: int = 1, density: float = 0.5, integer: bool = True) -> MbqpInstance:
    """Small random pure-binary instance; the zero vector is always feasible (b >= 0)."""
    H = []
    for i in range(n):
        for j in range(i, n):
            if rng.random() < density:
                v = float(rng.integers(-20, 21)) if integer else float(rng.normal())
                if v != 0:
                    H.append([i, j, v])
    c = rng.integers(-20, 21, n).astype(float) if integer else rng.normal(size=n)
    A, b = [], []
    for r in range(m):
        w = rng.integers(1, 10, n)
        A += [[r, j, float(w[j])] for j in range(n)]
        b.append(float(max(1, w.sum() // 2)))
    return MbqpInstance(
        n=n, H=np.array(H, dtype=float).reshape(-1, 3), c=c, A=np.array(A, dtype=float).reshape(-1, 3),
        b=b, binary=range(n), lb=np.zeros(n), ub=np.ones(n), name=f"rand{n}",
    )


# -- reference forward pass, numpy only -------------------------------------


def _lin(p, name, x):
    y = x @ p[name + ".weight"].T
    if name + ".bias" in p:
        y = y + p[name + ".bias"]
    return y


def _relu(x):
    return np.maximum(x, 0.0)


def _leaky(x):
    return np.where(x > 0, x, 0.2 * x)


def _attend(p, pre, heads, x_src, x_dst, src, dst, attr):
    """Per-destination loop version of one attention round."""
    n_dst, hdim = x_dst.shape
    d = hdim // heads
    if len(src) == 0 or n_dst == 0:
        return x_dst.copy()
    Wq, Wk, Wv = p[pre + ".query.weight"], p[pre + ".key.weight"], p[pre + ".value.weight"]
    ek, ev, a = p[pre + ".edge_key"], p[pre + ".edge_value"], p[pre + ".attn"]
    out = x_dst.copy()
    for t in range(n_dst):
        edges = [e for e in range(len(src)) if dst[e] == t]
        if not edges:
            continue
        agg = np.zeros(hdim)
        for h in range(heads):
            sl = slice(h * d, (h + 1) * d)
            scores = []
            for e in edges:
                s = _leaky(Wq @ x_dst[t] + Wk @ x_src[src[e]] + attr[e] * ek)
                scores.append(float(a[h] @ s[sl]))
            scores = np.array(scores)
            alpha = np.exp(scores - scores.max())
            alpha /= alpha.sum()
            for al, e in zip(alpha, edges):
                val = Wv @ x_src[src[e]] + attr[e] * ev
                agg[sl] += al * val[sl]
        out[t] = x_dst[t] + _relu(p[pre + ".out.weight"] @ agg + p[pre + ".out.bias"])
    return out


def reference_logits(params: dict, heads: int, graph) -> np.ndarray:
    """Logits of the tripartite attention network from a name -> ndarray parameter map."""
    cv = graph.cv_edges
    coef = cv[:, 2] if len(cv) else np.zeros(0)
    scale = np.max(np.abs(coef)) if len(coef) and np.max(np.abs(coef)) > 0 else 1.0
    cv_c, cv_v, cv_attr = cv[:, 0].astype(int), cv[:, 1].astype(int), coef / scale
    qv = graph.qv_edges.reshape(-1, 2)
    qv_q, qv_v, qv_attr = qv[:, 0], qv[:, 1], np.ones(len(qv))
    v1 = _relu(_lin(params, "embed_v.0", graph.v_feats))
    c1 = _relu(_lin(params, "embed_c.0", graph.c_feats)) if len(graph.c_feats) else np.zeros((0, v1.shape[1]))
    q1 = _relu(_lin(params, "embed_q.0", graph.q_feats)) if len(graph.q_feats) else np.zeros((0, v1.shape[1]))
    q2 = _attend(params, "q_from_v", heads, v1, q1, qv_v, qv_q, qv_attr)
    v2 = _attend(params, "v_from_q", heads, q2, v1, qv_q, qv_v, qv_attr)
    c2 = _attend(params, "c_from_v", heads, v2, c1, cv_v, cv_c, cv_attr)
    v3 = _attend(params, "v_from_c", heads, c2, v2, cv_c, cv_v, cv_attr)
    h = v3[np.flatnonzero(graph.binary_mask)]
    h = _relu(_lin(params, "head.0", h))
    h = _relu(_lin(params, "head.2", h))
    return _lin(params, "head.4", h)[:, 0]


def adamw_reference(theta, grads_seq, lr, b1, b2, eps, wd):
    """Scalar textbook AdamW recurrence, written out step by step."""
    m = v = 0.0
    for t, g in enumerate(grads_seq, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1**t)
        vh = v / (1 - b2**t)
        theta = theta - lr * (mh / (math.sqrt(vh) + eps) + wd * theta)
    return theta


def central_differences(f, theta: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """(f(theta + h e_i) - f(theta - h e_i)) / 2h for every coordinate."""
    g = np.zeros_like(theta)
    for i in range(theta.size):
        e = theta.copy()
        e[i] += step
        up = f(e)
        e[i] -= 2 * step
        g[i] = (up - f(e)) / (2 * step)
    return g


def max_relative_error(g: np.ndarray, ref: np.ndarray) -> float:
    """max_i |g_i - ref_i| / max_i |ref_i|: the error measured on the gradient's own scale.

    Entries near zero are dominated by finite-difference truncation and rounding,
    so an entrywise ratio would test the oracle rather than the gradient.
    """
    scale = float(np.max(np.abs(ref)))
    return float(np.max(np.abs(g - ref))) / scale if scale > 0 else float(np.max(np.abs(g)))
