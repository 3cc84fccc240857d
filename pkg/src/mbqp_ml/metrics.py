"""Primal gap, primal integral and win counting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

WIN_TIE_TOL = 1e-12


@dataclass
class Trajectory:
    """Incumbent updates (t, objective) over the horizon [0, T]."""

    events: list[tuple[float, float]] = field(default_factory=list)
    horizon: float = 60.0

    def __post_init__(self):
        self.events = [(float(t), float(v)) for t, v in self.events]
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")
        prev_t, prev_v = 0.0, float("inf")
        for t, v in self.events:
            if t < prev_t or t > self.horizon:
                raise ValueError(f"event time {t} out of order or beyond the horizon")
            if not v < prev_v:
                raise ValueError("trajectory objectives must strictly improve")
            prev_t, prev_v = t, v


def primal_gap(v: float | None, v_star: float, found: bool = True) -> float:
    if not found or v is None:
        return 1.0
    if v * v_star < 0:
        return 1.0
    if v == 0 and v_star == 0:
        return 0.0
    return abs(v - v_star) / max(abs(v), abs(v_star))


def primal_integral(traj: Trajectory, v_star: float) -> float:
    """Integral over [0, T] of the step function: gap 1 before the first incumbent,
    then the gap of the latest incumbent."""
    total = 0.0
    t_prev, gap = 0.0, 1.0
    for t, v in traj.events:
        total += gap * (t - t_prev)
        t_prev, gap = t, primal_gap(v, v_star)
    return total + gap * (traj.horizon - t_prev)


def gap_series(traj: Trajectory, v_star: float) -> list[tuple[float, float]]:
    """Change points of the gap step function, closed at the horizon."""
    pts = [(0.0, 1.0)]
    for t, v in traj.events:
        g = primal_gap(v, v_star)
        if pts and pts[-1][0] == t:
            pts[-1] = (t, g)
        else:
            pts.append((t, g))
    if pts[-1][0] < traj.horizon:
        pts.append((traj.horizon, pts[-1][1]))
    return pts


def count_wins(pi_table: Mapping[str, Mapping[str, float]], methods: Sequence[str] | None = None) -> dict[str, int]:
    """Wins per method from ``pi_table[instance][method]``; ties credit every tied method."""
    if methods is None:
        methods = sorted({m for row in pi_table.values() for m in row})
    if not methods:
        raise ValueError("no methods to compare")
    wins = {m: 0 for m in methods}
    for row in pi_table.values():
        vals = {m: row[m] for m in methods if m in row}
        if not vals:
            continue
        best = min(vals.values())
        for m, v in vals.items():
            if v <= best + WIN_TIE_TOL:
                wins[m] += 1
    return wins
