"""Depth-first branch-and-bound for pure-binary (sub-)MBQPs, and an exhaustive oracle."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .instance import FEAS_TOL, MbqpInstance, Solution, make_solution, round_half_up
from .relaxation import fractionality, solve_relaxation

MAX_ENUM_FREE = 20


class InfeasibleError(ValueError):
    """Raised when a (sub-)problem has no feasible point."""


@dataclass
class SolveResult:
    best: Solution | None
    worst: Solution | None
    trajectory: list[tuple[int, float]] = field(default_factory=list)
    nodes_explored: int = 0
    proven_optimal: bool = False

    def to_dict(self) -> dict:
        return {
            "best": None if self.best is None else self.best.to_dict(),
            "worst": None if self.worst is None else self.worst.to_dict(),
            "trajectory": [[t, v] for t, v in self.trajectory],
            "nodes_explored": self.nodes_explored,
            "proven_optimal": self.proven_optimal,
        }


def _split_variables(inst: MbqpInstance) -> tuple[np.ndarray, np.ndarray]:
    free = np.flatnonzero(inst.lb < inst.ub)
    bad = free[~inst.is_binary[free]]
    if len(bad):
        raise ValueError(f"free non-binary variables are not supported: {bad.tolist()[:5]}")
    base = inst.lb.copy()
    return free, base


def interval_bound(inst: MbqpInstance) -> float:
    """Lower bound on x'Hx + c'x over all binary completions of the fixed variables.

    With F fixed and R free, the objective is const + sum_j g_j x_j + sum_{i<j in R} 2 H_ij x_i x_j
    where g_j folds c_j, H_jj and the cross terms with F; each term is bounded by min(0, .).
    Constraints are ignored.
    """
    free, x0 = _split_variables(inst)
    x0[free] = 0.0
    H = inst.H_dense
    const = float(x0 @ H @ x0 + inst.c @ x0)
    g = inst.c[free] + np.diag(H)[free] + 2.0 * (H[free] @ x0)
    M = np.triu(np.minimum(0.0, 2.0 * H[np.ix_(free, free)]), k=1)
    return const + float(np.minimum(g, 0.0).sum()) + float(M.sum())


def solve(
    inst: MbqpInstance,
    node_budget: int = 100_000,
    x_hint: np.ndarray | None = None,
    relax_budget: int = 500,
    tol: float = FEAS_TOL,
) -> SolveResult:
    """Depth-first branch-and-bound over the free binaries.

    Branching order is fixed at the root: most fractional in the relaxation point
    ``x_hint`` first (ties by index), exploring the rounded value before its
    complement. Nodes are pruned when the interval bound cannot beat the
    incumbent or when some row cannot be satisfied by any completion. Time is
    measured in visited nodes.
    """
    free, x0 = _split_variables(inst)
    r = len(free)
    H, c, A, b = inst.H_dense, inst.c, inst.A_dense, inst.b
    m = len(b)

    if r:
        if x_hint is None:
            x_hint = solve_relaxation(inst, relax_budget).x_bar
        frac = fractionality(x_hint, free)
        order = free[np.lexsort((free, -frac))]
        first = round_half_up(np.asarray(x_hint)[order]).clip(0, 1).astype(int)
    else:
        order = free
        first = np.zeros(0, dtype=int)

    x0[order] = 0.0
    const0 = float(x0 @ H @ x0 + c @ x0)
    g0 = c[order] + np.diag(H)[order] + 2.0 * (H[order] @ x0)
    H2 = 2.0 * H[np.ix_(order, order)]
    negpair = np.triu(np.minimum(H2, 0.0), k=1)
    # pair_lb[t]: sum of min(0, 2H_ab) over free pairs t <= a < b
    pair_lb = np.zeros(r + 1)
    if r:
        pair_lb[:r] = np.cumsum(negpair.sum(axis=1)[::-1])[::-1]
    A_r = A[:, order]
    # row_lb[t]: smallest possible activity contributed by positions >= t
    row_lb = np.zeros((r + 1, m))
    if r and m:
        row_lb[:r] = np.cumsum(np.minimum(A_r, 0.0).T[::-1], axis=0)[::-1]
    act0 = A @ x0 if m else np.zeros(0)
    b_tol = b + tol

    best: Solution | None = None
    worst: Solution | None = None
    best_obj = np.inf
    trajectory: list[tuple[int, float]] = []
    vals = np.zeros(r)
    nodes = 0
    exhausted = True

    # entries: (depth, value assigned at depth-1, const, g, activity)
    stack = [(0, -1, const0, g0, act0)]
    while stack:
        if nodes >= node_budget:
            exhausted = False
            break
        t, v, const, g, act = stack.pop()
        nodes += 1
        if t > 0:
            vals[t - 1] = v
        if m and np.any(act + row_lb[t] > b_tol):
            continue
        if t == r:
            x = x0.copy()
            x[order] = vals
            sol = make_solution(inst, x, tol)
            if not sol.feasible:
                continue
            if sol.objective < best_obj:
                best, best_obj = sol, sol.objective
                trajectory.append((nodes, sol.objective))
            if worst is None or sol.objective > worst.objective:
                worst = sol
            continue
        bound = const + pair_lb[t] + float(np.minimum(g[t:], 0.0).sum())
        if bound - 1e-9 * (1.0 + abs(bound)) >= best_obj:
            continue
        pref = int(first[t])
        for val in (1 - pref, pref):  # preferred child is pushed last, popped first
            if val:
                stack.append((t + 1, 1, const + g[t], g + H2[t], act + A_r[:, t] if m else act))
            else:
                stack.append((t + 1, 0, const, g, act))

    return SolveResult(
        best=best,
        worst=worst,
        trajectory=trajectory,
        nodes_explored=nodes,
        proven_optimal=exhausted and best is not None,
    )


def enumerate_exact(inst: MbqpInstance, tol: float = FEAS_TOL, chunk: int = 1 << 14) -> tuple[Solution, Solution]:
    """Best and worst feasible points by enumerating every assignment of the free binaries."""
    free, x0 = _split_variables(inst)
    r = len(free)
    if r > MAX_ENUM_FREE:
        raise ValueError(f"{r} free binaries exceeds the enumeration limit of {MAX_ENUM_FREE}")
    H, c, A, b = inst.H_dense, inst.c, inst.A_dense, inst.b
    best_i = worst_i = -1
    best_v, worst_v = np.inf, -np.inf
    total = 1 << r
    bits = np.arange(r, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        X = np.tile(x0, (len(codes), 1))
        X[:, free] = (codes[:, None] >> bits) & 1
        ok = np.ones(len(codes), dtype=bool)
        if len(b):
            ok = np.all(X @ A.T <= b + tol, axis=1)
        if not ok.any():
            continue
        vals = np.einsum("ki,ij,kj->k", X, H, X) + X @ c
        vals = np.where(ok, vals, np.nan)
        k = int(np.nanargmin(vals))
        if vals[k] < best_v:
            best_v, best_i = vals[k], int(codes[k])
        k = int(np.nanargmax(vals))
        if vals[k] > worst_v:
            worst_v, worst_i = vals[k], int(codes[k])
    if best_i < 0:
        raise InfeasibleError("no feasible assignment of the free binaries")

    def point(code: int) -> Solution:
        x = x0.copy()
        x[free] = (code >> bits) & 1
        return make_solution(inst, x, tol)

    return point(best_i), point(worst_i)
