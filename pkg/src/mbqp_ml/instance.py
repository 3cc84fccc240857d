"""MBQP data model: min x'Hx + c'x  s.t.  Ax <= b, lb <= x <= ub, x_j in {0,1} for j in B."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

FEAS_TOL = 1e-6


@dataclass(eq=False)
class MbqpInstance:
    """An MBQP in minimization form.

    ``H`` holds one ``(i, j, v)`` triple per unordered pair; an off-diagonal triple
    stands for both H_ij and H_ji, so it contributes ``2 * v * x_i * x_j`` to the
    objective. Equality rows are stored as two opposed ``<=`` rows.
    """

    n: int
    H: np.ndarray  # (nnz, 3): i, j, v
    c: np.ndarray
    A: np.ndarray  # (nnz, 3): row, col, v
    b: np.ndarray
    binary: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    name: str = "instance"
    sense: str = field(default="min")

    def __post_init__(self):
        self.H = np.asarray(self.H, dtype=float).reshape(-1, 3)
        self.A = np.asarray(self.A, dtype=float).reshape(-1, 3)
        self.c = np.asarray(self.c, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.binary = np.asarray(sorted(set(int(j) for j in self.binary)), dtype=np.int64)
        self.lb = np.asarray(self.lb, dtype=float)
        self.ub = np.asarray(self.ub, dtype=float)
        self._validate()

    def _validate(self):
        n = self.n
        if self.sense != "min":
            raise ValueError("only minimization instances are supported; negate H and c")
        for name in ("c", "lb", "ub"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} must have length {n}")
        if np.any(self.lb > self.ub):
            raise ValueError("lb > ub")
        if len(self.binary) and (self.binary[0] < 0 or self.binary[-1] >= n):
            raise ValueError("binary index out of range")
        if np.any(self.lb[self.binary] < 0) or np.any(self.ub[self.binary] > 1):
            raise ValueError("binary variables must lie within [0, 1]")
        if len(self.H):
            ij = self.H[:, :2].astype(np.int64)
            if ij.min() < 0 or ij.max() >= n:
                raise ValueError("H index out of range")
            pairs = {(min(i, j), max(i, j)) for i, j in ij.tolist()}
            if len(pairs) != len(ij):
                raise ValueError("H has duplicate entries for the same pair")
        if len(self.A):
            rc = self.A[:, :2].astype(np.int64)
            if rc[:, 0].min() < 0 or rc[:, 0].max() >= self.m or rc[:, 1].min() < 0 or rc[:, 1].max() >= n:
                raise ValueError("A index out of range")
            if np.any(self.A[:, 2] == 0):
                raise ValueError("A stores an explicit zero")

    @property
    def m(self) -> int:
        return len(self.b)

    @cached_property
    def H_dense(self) -> np.ndarray:
        H = np.zeros((self.n, self.n))
        if len(self.H):
            i = self.H[:, 0].astype(np.int64)
            j = self.H[:, 1].astype(np.int64)
            H[i, j] = self.H[:, 2]
            H[j, i] = self.H[:, 2]
        H.setflags(write=False)
        return H

    @cached_property
    def A_dense(self) -> np.ndarray:
        A = np.zeros((self.m, self.n))
        if len(self.A):
            A[self.A[:, 0].astype(np.int64), self.A[:, 1].astype(np.int64)] = self.A[:, 2]
        A.setflags(write=False)
        return A

    @cached_property
    def is_binary(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.binary] = True
        return mask

    def free_binaries(self) -> np.ndarray:
        return self.binary[self.lb[self.binary] < self.ub[self.binary]]

    def replace_bounds(self, lb: np.ndarray, ub: np.ndarray) -> "MbqpInstance":
        return MbqpInstance(
            n=self.n, H=self.H, c=self.c, A=self.A, b=self.b, binary=self.binary,
            lb=lb, ub=ub, name=self.name,
        )

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n": self.n,
            "sense": self.sense,
            "H": [[int(i), int(j), float(v)] for i, j, v in self.H.tolist()],
            "c": self.c.tolist(),
            "A": [[int(r), int(k), float(v)] for r, k, v in self.A.tolist()],
            "b": self.b.tolist(),
            "binary": self.binary.tolist(),
            "lb": self.lb.tolist(),
            "ub": self.ub.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "MbqpInstance":
        return cls(
            n=int(d["n"]), H=np.array(d["H"], dtype=float), c=d["c"],
            A=np.array(d["A"], dtype=float), b=d["b"], binary=d["binary"],
            lb=d["lb"], ub=d["ub"], name=d.get("name", "instance"), sense=d.get("sense", "min"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "MbqpInstance":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class Solution:
    x: np.ndarray
    objective: float
    feasible: bool
    max_violation: float

    def key(self) -> bytes:
        """Exact identity of the assignment, used for deduplication."""
        return np.ascontiguousarray(self.x, dtype=float).tobytes()

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "obj": self.objective}


def _check_dim(inst: MbqpInstance, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise ValueError(f"expected a vector of length {inst.n}, got shape {x.shape}")
    return x


def evaluate_objective(inst: MbqpInstance, x) -> float:
    x = _check_dim(inst, x)
    return float(x @ inst.H_dense @ x + inst.c @ x)


def check_feasibility(inst: MbqpInstance, x, tol: float = FEAS_TOL) -> tuple[bool, float]:
    x = _check_dim(inst, x)
    if tol < 0:
        raise ValueError("tol must be non-negative")
    viol = 0.0
    if inst.m:
        viol = max(viol, float(np.max(inst.A_dense @ x - inst.b, initial=0.0)))
    viol = max(viol, float(np.max(inst.lb - x, initial=0.0)), float(np.max(x - inst.ub, initial=0.0)))
    if len(inst.binary):
        xb = x[inst.binary]
        viol = max(viol, float(np.max(np.minimum(np.abs(xb), np.abs(xb - 1.0)))))
    return viol <= tol, viol


def make_solution(inst: MbqpInstance, x, tol: float = FEAS_TOL) -> Solution:
    x = np.array(_check_dim(inst, x), dtype=float)
    x.setflags(write=False)
    feasible, viol = check_feasibility(inst, x, tol)
    return Solution(x=x, objective=evaluate_objective(inst, x), feasible=feasible, max_violation=viol)


def fix_variables(inst: MbqpInstance, assignments: Mapping[int, int]) -> MbqpInstance:
    """Sub-MBQP with each assigned binary pinned by its bounds (lb = ub = value)."""
    if not assignments:
        return inst
    lb = inst.lb.copy()
    ub = inst.ub.copy()
    for j, v in assignments.items():
        j = int(j)
        if not (0 <= j < inst.n and inst.is_binary[j]):
            raise ValueError(f"variable {j} is not binary")
        if v not in (0, 1):
            raise ValueError(f"binary variable {j} can only be fixed to 0 or 1, got {v}")
        lb[j] = ub[j] = float(v)
    return inst.replace_bounds(lb, ub)


def softmax_weights(objectives: Sequence[float]) -> np.ndarray:
    """exp(-obj_k) / sum_l exp(-obj_l), shifted by the minimum objective."""
    obj = np.asarray(objectives, dtype=float)
    if obj.size == 0:
        raise ValueError("need at least one objective")
    e = np.exp(-(obj - obj.min()))
    return e / e.sum()


def energy_weights(solutions: Iterable[Solution], inst: MbqpInstance | None = None) -> np.ndarray:
    solutions = list(solutions)
    if not solutions:
        raise ValueError("need at least one solution")
    if any(not s.feasible for s in solutions):
        raise ValueError("energy of an infeasible solution is infinite; filter first")
    objs = [s.objective if inst is None else evaluate_objective(inst, s.x) for s in solutions]
    return softmax_weights(objs)


def minmax_normalize(values: Sequence[float], lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Map values to [0, 1] using [lo, hi] (defaults to their own range); a zero range maps to 0."""
    v = np.asarray(values, dtype=float)
    lo = float(v.min()) if lo is None else lo
    hi = float(v.max()) if hi is None else hi
    span = hi - lo
    if span <= 0:
        return np.zeros_like(v)
    return (v - lo) / span


def round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(x, dtype=float) + 0.5)
