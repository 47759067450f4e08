"""Structured outcome of a numerical check and the verdict rules that produce it."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def jsonable(obj):
    """Convert numpy scalars/arrays and tuples into plain JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


@dataclass
class VerificationReport:
    name: str
    grid_label: str
    grid: list
    observed: list
    se: list
    trend: dict
    tolerance: dict
    verdict: str
    seed: int | None = None
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.grid) != len(self.observed) or len(self.observed) != len(self.se):
            raise ValueError("grid, observed and se must have equal length")
        if self.verdict not in (PASS, FAIL, INCONCLUSIVE):
            raise ValueError(f"bad verdict {self.verdict!r}")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        return jsonable(asdict(self))

    def csv_rows(self) -> tuple[list[str], list[list]]:
        header = ["grid_id", self.grid_label, "observed", "se"]
        rows = []
        for i, (g, o, s) in enumerate(zip(self.grid, self.observed, self.se)):
            g = g if np.ndim(g) == 0 else float("nan")
            rows.append([i, g, o, s])
        return header, rows


def loglog_slope(grid, values) -> float:
    g = np.asarray(grid, dtype=float)
    v = np.asarray(values, dtype=float)
    ok = (g > 0) & (v > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(g[ok]), np.log(v[ok]), 1)[0])


def trend_to_zero(observed, se, decay_ratio: float = 0.5) -> tuple[str, dict]:
    """Ordinal test that a sequence indexed by increasing n tends to zero.

    Pass when the values are all exactly zero, or when they strictly decrease
    and the last is below ``decay_ratio`` times the first.  Otherwise the
    verdict is inconclusive when the last standard error exceeds half the last
    value, else fail.  Loosening ``decay_ratio`` can only turn fail or
    inconclusive into pass, never the reverse.
    """
    obs = np.asarray(observed, dtype=float)
    err = np.asarray(se, dtype=float)
    strictly = bool(np.all(np.diff(obs) < 0))
    with np.errstate(over="ignore"):
        ratio = float(obs[-1] / obs[0]) if obs[0] != 0 else float("nan")
    info = {"strictly_decreasing": strictly, "last_over_first": ratio, "decay_ratio": decay_ratio}
    if np.all(obs == 0):
        info["identically_zero"] = True
        return PASS, info
    if strictly and obs[-1] < decay_ratio * obs[0]:
        return PASS, info
    if err[-1] > 0.5 * abs(obs[-1]):
        return INCONCLUSIVE, info
    return FAIL, info


def decreasing_within_noise(errors, se, k: float = 3.0, floor: float = 0.0) -> bool:
    """Each successive error is smaller than the previous one, or already within ``max(k SE, floor)`` of zero."""
    errors = np.asarray(errors, dtype=float)
    se = np.asarray(se, dtype=float)
    for i in range(1, len(errors)):
        if not (errors[i] < errors[i - 1] or errors[i] <= max(k * se[i], floor)):
            return False
    return True
