"""Continuous relaxation by augmented-Lagrangian projected gradient on the box."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .instance import FEAS_TOL, MbqpInstance


@dataclass
class RelaxResult:
    x_bar: np.ndarray
    relaxed_objective: float
    max_violation: float
    iterations: int
    # merit of the retained iterate after each outer round
    merit_history: list[float] = field(default_factory=list)


def _spectral_norm(M: np.ndarray, iters: int = 50) -> float:
    """Largest singular value by power iteration on M'M (deterministic start)."""
    if M.size == 0:
        return 0.0
    v = np.ones(M.shape[1]) / np.sqrt(M.shape[1])
    s = 0.0
    for _ in range(iters):
        w = M.T @ (M @ v)
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        s = nrm
    return float(np.sqrt(s)) * 1.01  # small safety margin over the estimate


def solve_relaxation(
    inst: MbqpInstance,
    budget: int = 5000,
    tol: float = FEAS_TOL,
    outer_rounds: int = 20,
    rho0: float = 1.0,
    rho_growth: float = 10.0,
    rho_max: float = 1e6,
) -> RelaxResult:
    """Fractional point in [lb, ub] for min x'Hx + c'x s.t. Ax <= b.

    Each outer round runs projected gradient steps of length 1/L on the augmented
    Lagrangian, then updates ``lam += rho * max(0, Ax - b)`` and grows ``rho``.
    The returned iterate is the best one by the exact-penalty merit
    ``f(x) + mu * sum(max(0, Ax - b))`` with a fixed ``mu``; H may be indefinite,
    so there is no optimality guarantee.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    H, c, A, b = inst.H_dense, inst.c, inst.A_dense, inst.b
    lb, ub = inst.lb, inst.ub
    norm_H = _spectral_norm(H)
    norm_A2 = _spectral_norm(A) ** 2
    # fixed exact-penalty weight, larger than any gradient the objective can produce on the box
    span = np.maximum(np.abs(lb), np.abs(ub))
    mu = 10.0 * (2.0 * norm_H * float(np.linalg.norm(span)) + float(np.linalg.norm(c))) + 1.0

    def objective(x):
        return float(x @ H @ x + c @ x)

    def violation(x):
        return np.maximum(A @ x - b, 0.0) if len(b) else np.zeros(0)

    def merit(x):
        return objective(x) + mu * float(violation(x).sum())

    x = np.clip(np.full(inst.n, 0.5), lb, ub)
    lam = np.zeros(len(b))
    rho = rho0
    best_x, best_merit = x.copy(), merit(x)
    history: list[float] = []
    per_round = max(1, budget // outer_rounds)
    used = 0
    while used < budget:
        L = 2.0 * norm_H + rho * norm_A2
        step = 1.0 / L if L > 0 else 1.0
        for _ in range(min(per_round, budget - used)):
            g = 2.0 * (H @ x) + c
            if len(b):
                v = violation(x)
                g = g + A.T @ (lam + rho * v)
            x_new = np.clip(x - step * g, lb, ub)
            used += 1
            if np.array_equal(x_new, x):
                break
            x = x_new
        m = merit(x)
        if m < best_merit:
            best_x, best_merit = x.copy(), m
        history.append(best_merit)
        if len(b):
            lam = lam + rho * violation(x)
            rho = min(rho * rho_growth, rho_max)
        if len(history) >= outer_rounds and not len(b):
            break
        if len(history) >= outer_rounds and float(violation(best_x).max(initial=0.0)) <= tol:
            break
    v = violation(best_x)
    return RelaxResult(
        x_bar=best_x,
        relaxed_objective=objective(best_x),
        max_violation=float(v.max(initial=0.0)),
        iterations=used,
        merit_history=history,
    )


def fractionality(x_bar, binary=None) -> np.ndarray:
    """Distance to the nearest integer; restricted to ``binary`` indices when given."""
    x = np.asarray(x_bar, dtype=float)
    if binary is not None:
        x = x[np.asarray(binary, dtype=np.int64)]
    return np.minimum(x - np.floor(x), np.ceil(x) - x)


def least_fractional(x_bar, binary, count: int) -> np.ndarray:
    """The ``count`` binaries with smallest fractionality, ties by ascending index."""
    binary = np.asarray(binary, dtype=np.int64)
    f = fractionality(x_bar, binary)
    order = np.lexsort((binary, f))
    return binary[order[:count]]
