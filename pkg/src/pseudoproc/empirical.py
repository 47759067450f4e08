"""Empirical distribution functions, pseudo-observations and the empirical process."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._dominance import DominanceCounter, dominance_counts
from .errors import DomainError, EvaluationError, FitError
from .models import Sample

# Only the literal ECDF convention is implemented: max rank, observation counted
# in its own ECDF, no n/(n+1) rescaling.
TIE_POLICY = "ecdf-max-rank"
RIDGE_JITTER = 1e-12


def _points(sample: Sample, x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim <= 1
    arr = arr.reshape(1, -1) if scalar else arr
    if arr.shape[1] != sample.dim:
        raise DomainError(f"point dimension {arr.shape[1]} does not match sample dimension {sample.dim}")
    return arr, scalar


def joint_ecdf(sample: Sample, x):
    """``(1/n) #{i : X_i <= x}`` (componentwise) at one point or at each row of ``x``."""
    pts, scalar = _points(sample, x)
    vals = dominance_counts(sample.rows, pts) / sample.n
    return float(vals[0]) if scalar else vals


class JointECDF:
    """The joint ECDF ``eta_n`` as a reusable function of the evaluation point."""

    kind = "joint-ecdf"

    def __init__(self, sample: Sample):
        self.sample = sample
        self._counter = DominanceCounter(sample.rows) if sample.dim == 2 else None

    def __call__(self, x):
        pts, scalar = _points(self.sample, x)
        if self._counter is not None:
            vals = self._counter(pts) / self.sample.n
        else:
            vals = dominance_counts(self.sample.rows, pts) / self.sample.n
        return float(vals[0]) if scalar else vals


class MarginalECDF:
    """Vector of marginal ECDFs ``(eta_{n,1}, ..., eta_{n,d})`` applied coordinatewise."""

    kind = "marginal-ecdf"

    def __init__(self, sample: Sample):
        self.sample = sample
        self._sorted = np.sort(sample.rows, axis=0)

    def __call__(self, x):
        pts, scalar = _points(self.sample, x)
        out = np.empty_like(pts)
        for j in range(pts.shape[1]):
            out[:, j] = np.searchsorted(self._sorted[:, j], pts[:, j], side="right")
        out /= self.sample.n
        return out[0] if scalar else out


@dataclass(frozen=True, eq=False)
class PseudoObservations:
    values: np.ndarray
    tie_policy: str = TIE_POLICY

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def kendall_pseudo_obs(sample: Sample) -> PseudoObservations:
    """``eta_n(X_i)``: the joint ECDF at each observation, self included (so every value >= 1/n)."""
    vals = dominance_counts(sample.rows, sample.rows) / sample.n
    return PseudoObservations(vals)


def copula_pseudo_obs(sample: Sample) -> PseudoObservations:
    """Rows ``(eta_{n,1}(X_{i,1}), ..., eta_{n,d}(X_{i,d}))`` = column max-ranks divided by n."""
    ranks = stats.rankdata(sample.rows, method="max", axis=0)
    return PseudoObservations(ranks / sample.n)


def empirical_process(sample: Sample, f, pf: float) -> float:
    """``sqrt(n) * (P_n f - pf)`` with the population mean ``pf`` supplied by the caller."""
    vals = np.asarray(f(sample.rows), dtype=float).reshape(-1)
    if vals.shape[0] != sample.n:
        raise EvaluationError(f"f returned {vals.shape[0]} values for {sample.n} rows")
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("f produced non-finite values")
    return math.sqrt(sample.n) * (float(vals.mean()) - float(pf))


@dataclass(frozen=True, eq=False)
class PolyFit:
    """Least-squares polynomial ``g(x) = sum_k coeffs[k] x^k`` fitted to (x, y) rows."""

    coeffs: np.ndarray
    residuals: np.ndarray
    jittered: bool = False
    kind = "polynomial-ls-fit"

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return float(acc) if acc.ndim == 0 else acc


def ls_polyfit(sample: Sample, degree: int) -> PolyFit:
    """Fit by the normal equations; adds ridge jitter when the Gram matrix is ill-conditioned."""
    if sample.dim != 2:
        raise DomainError("ls_polyfit expects (x, y) rows")
    degree = int(degree)
    if degree < 0:
        raise DomainError("degree must be >= 0")
    if sample.n <= degree:
        raise DomainError(f"need n > degree (n={sample.n}, degree={degree})")
    x, y = sample.rows[:, 0], sample.rows[:, 1]
    design = np.vander(x, degree + 1, increasing=True)
    gram = design.T @ design
    rhs = design.T @ y
    jittered = False
    if np.linalg.cond(gram) > 1e12:
        gram = gram + RIDGE_JITTER * np.eye(degree + 1)
        jittered = True
        if np.linalg.matrix_rank(design) < degree + 1:
            raise FitError("design matrix is rank deficient even after ridge jitter")
    try:
        coeffs = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"normal equations could not be solved: {exc}") from exc
    resid = y - design @ coeffs
    coeffs.setflags(write=False)
    resid.setflags(write=False)
    return PolyFit(coeffs, resid, jittered)
