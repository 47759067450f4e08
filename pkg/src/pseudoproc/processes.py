"""Pseudo-observation processes, their influence functions and Gaussian limits.

Processes are evaluated on finite index grids and returned as
:class:`ProcessPath` objects.  The limit of each process is the P-Brownian
bridge applied to an influence function; :func:`limit_covariance` estimates its
covariance by Monte Carlo and :func:`simulate_limit` samples it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from ._dominance import dominance_counts
from .empirical import copula_pseudo_obs, kendall_pseudo_obs, ls_polyfit
from .errors import DomainError, EvaluationError, NonPSDError, UnsupportedKindError
from .fclasses import Constant, FunctionClass, Indicator, StepSurvival
from .models import (BAND_DRAWS, BAND_WIDTH, DataModel, Sample, conditional_indicator_expectation,
                     conditional_indicator_expectation_exact, copula_cdf, draw, expectation, grad_cdf,
                     kendall_cdf, kendall_density, noise_cdf)
from .report import jsonable
from .seeding import replicate, rng_for

KENDALL_INTERVAL = (0.1, 0.9)
KENDALL_GRID_SIZE = 17
COPULA_GRID_SIDE = 5
ORACLE_DRAWS = 10**6
ORACLE_SEED = 20240917
SMOOTH_ORACLE_DRAWS = 200_000
JITTER_START, JITTER_MAX = 1e-10, 1e-6

INFLUENCE_KINDS = ("kendall-indicator", "kendall-smooth", "copula-indicator", "copula-smooth")


# --------------------------------------------------------------------------- paths

@dataclass(frozen=True, eq=False)
class ProcessPath:
    """One realisation of a process on a finite index grid."""

    kind: str
    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float, copy=True)
        values = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if grid.shape[0] != values.shape[0]:
            raise DomainError("grid and values must have equal length")
        if not np.all(np.isfinite(values)):
            raise EvaluationError("process values must be finite")
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    def index_columns(self) -> list[str]:
        if self.grid.ndim == 1:
            return ["index"]
        return [f"index_{j + 1}" for j in range(self.grid.shape[1])]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["grid_id", *self.index_columns(), "value"])
        g2 = self.grid[:, None] if self.grid.ndim == 1 else self.grid
        for i, (g, v) in enumerate(zip(g2, self.values)):
            w.writerow([i, *(repr(float(x)) for x in g), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind: str = "", meta: dict | None = None) -> "ProcessPath":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        if header[0] != "grid_id" or header[-1] != "value":
            raise DomainError("not a process CSV (expected grid_id,...,value)")
        grid = np.array([[float(x) for x in r[1:-1]] for r in body])
        if grid.ndim == 2 and grid.shape[1] == 1 and header[1] == "index":
            grid = grid[:, 0]
        return cls(kind, grid, [float(r[-1]) for r in body], meta or {})

    def to_dict(self) -> dict:
        return jsonable({"kind": self.kind, "grid": self.grid, "values": self.values, "meta": self.meta})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


# --------------------------------------------------------------------------- grids

def default_theta_grid(a: float = KENDALL_INTERVAL[0], b: float = KENDALL_INTERVAL[1],
                       size: int = KENDALL_GRID_SIZE) -> np.ndarray:
    return np.linspace(a, b, size)


def interior_grid(side: int = COPULA_GRID_SIDE, dim: int = 2) -> np.ndarray:
    """Product grid of the levels ``k / (side + 1)``, ``k = 1..side``."""
    levels = np.arange(1, side + 1) / (side + 1)
    mesh = np.meshgrid(*([levels] * dim), indexing="ij")
    return np.column_stack([m.reshape(-1) for m in mesh])


def _check_interval(grid, a: float, b: float) -> np.ndarray:
    g = np.asarray(grid, dtype=float).reshape(-1)
    if not 0.0 < a < b < 1.0:
        raise DomainError("need 0 < a < b < 1")
    if np.any(g < a - 1e-12) or np.any(g > b + 1e-12):
        raise DomainError(f"grid must lie inside [{a}, {b}]")
    return g


def _u_grid(grid, dim: int) -> np.ndarray:
    g = np.atleast_2d(np.asarray(grid, dtype=float))
    if g.shape[1] != dim:
        raise DomainError(f"u-grid points must have dimension {dim}")
    return g


def _step_ecdf(values, grid) -> np.ndarray:
    v = np.sort(np.asarray(values, dtype=float))
    return np.searchsorted(v, np.asarray(grid, dtype=float), side="right") / v.shape[0]


# --------------------------------------------------------------------------- Kendall

def kendall_empirical(sample: Sample, theta_grid) -> ProcessPath:
    """``K_n(theta)``: ECDF of the Kendall pseudo-observations."""
    grid = np.asarray(theta_grid, dtype=float).reshape(-1)
    vals = _step_ecdf(kendall_pseudo_obs(sample).values, grid)
    return ProcessPath("kendall-empirical", grid, vals, {"n": sample.n, "provenance": sample.provenance})


def kendall_process(sample: Sample, model: DataModel, theta_grid=None,
                    a: float = KENDALL_INTERVAL[0], b: float = KENDALL_INTERVAL[1]) -> ProcessPath:
    """``sqrt(n) (K_n(theta) - K(theta))`` on a grid inside ``[a, b]``."""
    grid = _check_interval(default_theta_grid(a, b) if theta_grid is None else theta_grid, a, b)
    kn = kendall_empirical(sample, grid).values
    vals = math.sqrt(sample.n) * (kn - kendall_cdf(model, grid))
    return ProcessPath("kendall", grid, vals, {"n": sample.n, "model": model.to_dict(),
                                               "provenance": sample.provenance})


# --------------------------------------------------------------------------- copula

def copula_empirical(sample: Sample, u_grid) -> ProcessPath:
    """``C_n(u)``: ECDF of the copula pseudo-observations."""
    grid = _u_grid(u_grid, sample.dim)
    pseudo = copula_pseudo_obs(sample).values
    vals = dominance_counts(pseudo, grid) / sample.n
    return ProcessPath("copula-empirical", grid, vals, {"n": sample.n, "provenance": sample.provenance})


def copula_process(sample: Sample, model: DataModel, u_grid=None) -> ProcessPath:
    """``sqrt(n) (C_n(u) - C(u))``; the default grid is the 5 x 5 interior grid."""
    grid = _u_grid(interior_grid(dim=sample.dim) if u_grid is None else u_grid, sample.dim)
    cn = copula_empirical(sample, grid).values
    vals = math.sqrt(sample.n) * (cn - copula_cdf(model, grid))
    return ProcessPath("copula", grid, vals, {"n": sample.n, "model": model.to_dict(),
                                              "provenance": sample.provenance})


# --------------------------------------------------------------------------- residuals

def residual_process(sample: Sample, model: DataModel, degree: int, theta_grid) -> ProcessPath:
    """``sqrt(n) (F_n(theta) - F_e(theta))`` for the residuals of a polynomial LS fit."""
    grid = np.asarray(theta_grid, dtype=float).reshape(-1)
    fit = ls_polyfit(sample, degree)
    fn = _step_ecdf(fit.residuals, grid)
    vals = math.sqrt(sample.n) * (fn - noise_cdf(model, grid))
    return ProcessPath("residual", grid, vals, {"n": sample.n, "degree": int(degree),
                                                "model": model.to_dict(), "jittered": fit.jittered})


# --------------------------------------------------------------------------- smooth classes

@lru_cache(maxsize=32)
def _oracle_draws(model: DataModel, size: int, seed: int) -> np.ndarray:
    out = draw(model, size, np.random.default_rng(seed))
    out.setflags(write=False)
    return out


def oracle_draws(model: DataModel, size: int = ORACLE_DRAWS, seed: int = ORACLE_SEED) -> np.ndarray:
    """Cached model draws shared by the population-constant oracles."""
    return _oracle_draws(model, int(size), int(seed))


@lru_cache(maxsize=1024)
def kendall_mean(model: DataModel, member) -> float:
    """``P theta(eta_0) = int theta(t) dK(t)``.

    Closed form for indicators, survival steps and constants; otherwise
    adaptive quadrature against the Kendall density.
    """
    if isinstance(member, Constant):
        return float(member.value)
    if isinstance(member, Indicator):
        return float(kendall_cdf(model, np.clip(member.threshold[0], 0.0, 1.0)))
    if isinstance(member, StepSurvival):
        return float(sum(w * kendall_cdf(model, np.clip(t[0], 0.0, 1.0))
                         for t, w in zip(member.atoms, member.weights)))

    def integrand(t):
        return float(member(np.array([t]))[0]) * kendall_density(model, t)

    val, _ = integrate.quad(integrand, 0.0, 1.0, limit=400, points=_breaks(member))
    return float(val)


def _breaks(member):
    pts = []
    for attr in ("threshold", "atoms"):
        if hasattr(member, attr):
            raw = np.asarray(getattr(member, attr), dtype=float).reshape(-1)
            pts.extend(float(p) for p in raw if 0.0 < p < 1.0)
    return sorted(set(pts)) or None


def population_means(model: DataModel, cls: FunctionClass, kind: str) -> np.ndarray:
    """``P theta(eta_0)`` for every member (cached per model and member)."""
    if kind == "kendall":
        if cls.dim != 1:
            raise DomainError("Kendall pseudo-levels are scalar; class must have dim 1")
        return np.array([kendall_mean(model, m) for m in cls.members])
    if kind == "copula":
        if cls.dim != model.dim:
            raise DomainError("copula class dimension must match the model")
        return np.array([copula_mean(model, m) for m in cls.members])
    raise UnsupportedKindError(f"unknown pseudo-observation kind {kind!r}")


@lru_cache(maxsize=1024)
def copula_mean(model: DataModel, member) -> float:
    """``E theta(U)`` for ``U`` with the model's copula.

    Closed form through ``C`` for indicators, survival steps and constants;
    tensor Gauss-Legendre quadrature for smooth members.
    """
    if isinstance(member, Constant):
        return float(member.value)
    if isinstance(member, Indicator):
        return float(copula_cdf(model, np.clip(member.threshold, 0.0, 1.0)))
    if isinstance(member, StepSurvival):
        return float(sum(w * copula_cdf(model, np.clip(t, 0.0, 1.0))
                         for t, w in zip(member.atoms, member.weights)))
    return expectation(model, member)


def smooth_indexed_process(sample: Sample, model: DataModel, cls: FunctionClass,
                           kind: str = "kendall") -> ProcessPath:
    """``n^{-1/2} sum_i theta(pseudo_i) - sqrt(n) P theta(eta_0)`` for every member of ``cls``."""
    if kind == "kendall":
        pseudo = kendall_pseudo_obs(sample).values
    elif kind == "copula":
        pseudo = copula_pseudo_obs(sample).values
    else:
        raise UnsupportedKindError(f"unknown pseudo-observation kind {kind!r}")
    means = population_means(model, cls, kind)
    vals = math.sqrt(sample.n) * (cls.evaluate(pseudo).mean(axis=1) - means)
    return ProcessPath(f"smooth-{kind}", np.arange(len(cls), dtype=float), vals,
                       {"n": sample.n, "model": model.to_dict(), "class": cls.to_config()})


# --------------------------------------------------------------------------- influence

@dataclass(frozen=True)
class InfluenceFunction:
    """Influence function of a pseudo-observation process at one index point.

    ``index`` is a level ``theta`` (Kendall indicator), a point ``u`` (copula
    indicator) or ignored for the smooth kinds, where ``member`` supplies the
    function and its gradient.  ``conditional`` selects the estimator of the
    level-set expectation in the Kendall indicator kind: ``"band"`` (Monte
    Carlo band conditioning) or ``"exact"`` (level-curve formula, d = 2).
    """

    kind: str
    model: DataModel
    index: tuple = ()
    member: object = None
    interval: tuple = KENDALL_INTERVAL
    conditional: str = "band"
    band_draws: int = BAND_DRAWS
    bandwidth: float = BAND_WIDTH
    oracle_size: int = SMOOTH_ORACLE_DRAWS
    seed: int = ORACLE_SEED

    def __post_init__(self):
        if self.kind not in INFLUENCE_KINDS:
            raise UnsupportedKindError(f"unknown influence kind {self.kind!r}")
        if self.conditional not in ("band", "exact"):
            raise DomainError("conditional must be 'band' or 'exact'")
        if self.kind == "kendall-indicator":
            a, b = self.interval
            th = float(np.asarray(self.index).reshape(-1)[0])
            if not (0.0 < a <= th <= b < 1.0):
                raise DomainError(f"theta={th} outside the restricted interval [{a}, {b}]")
        if self.kind.endswith("smooth") and self.member is None:
            raise DomainError("smooth influence functions need a class member")

    def __call__(self, x) -> np.ndarray:
        return influence_eval(self, x)


def influence_eval(inf: InfluenceFunction, x):
    """Evaluate an influence function at one point or at every row of ``x``.

    * kendall-indicator: ``1{C(x) <= theta} - k(theta) E[1{x <= X} | C(X) = theta]``
    * copula-indicator: ``1{x <= u} - grad C(u)' (1{x_j <= u_j})_j``
    * kendall-smooth: ``theta(C(x)) + E[theta'(C(X')) 1{x <= X'}]``
    * copula-smooth: ``theta(x) + sum_j E[d_j theta(X') 1{x_j <= X'_j}]``

    For the smooth kinds the correction is the Hadamard derivative applied to
    ``1{x <= .} - C``; the ``-C`` part is a constant and drops out of the
    bridge, so only the indicator part is kept.
    """
    model = inf.model
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 1
    pts = np.atleast_2d(arr)
    if pts.shape[1] != model.dim:
        raise DomainError(f"x must have dimension {model.dim}")
    if inf.kind == "kendall-indicator":
        theta = float(np.asarray(inf.index).reshape(-1)[0])
        if inf.conditional == "exact":
            cond = conditional_indicator_expectation_exact(model, pts, theta)
        else:
            cond = conditional_indicator_expectation(model, pts, theta, inf.band_draws, inf.bandwidth, inf.seed)
        out = (copula_cdf(model, pts) <= theta) - kendall_density(model, theta) * np.asarray(cond)
    elif inf.kind == "copula-indicator":
        u = np.asarray(inf.index, dtype=float).reshape(-1)
        grad = grad_cdf(model, u)
        ind = pts <= u
        out = np.all(ind, axis=1) - ind @ grad
    elif inf.kind == "kendall-smooth":
        ref = oracle_draws(model, inf.oracle_size, inf.seed)
        level = copula_cdf(model, ref)
        slope = inf.member.grad(level[:, None])[:, 0]
        corr = dominance_counts(-ref, -pts, weights=slope) / ref.shape[0]
        out = inf.member(copula_cdf(model, pts)[:, None]) + corr
    else:
        ref = oracle_draws(model, inf.oracle_size, inf.seed)
        grads = inf.member.grad(ref)
        out = inf.member(pts).astype(float)
        for j in range(model.dim):
            order = np.argsort(ref[:, j], kind="stable")
            tail = np.concatenate((np.cumsum(grads[order, j][::-1])[::-1], [0.0]))
            out = out + tail[np.searchsorted(ref[order, j], pts[:, j], side="left")] / ref.shape[0]
    out = np.asarray(out, dtype=float)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("influence function produced non-finite values")
    return float(out[0]) if scalar else out


def influence_family(model: DataModel, kind: str, grid=None, cls: FunctionClass | None = None,
                     **options) -> list[InfluenceFunction]:
    """Influence functions matching a process on ``grid`` (indicator kinds) or ``cls`` (smooth kinds)."""
    if kind == "kendall-indicator":
        grid = default_theta_grid() if grid is None else grid
        return [InfluenceFunction(kind, model, (float(t),), **options) for t in np.asarray(grid).reshape(-1)]
    if kind == "copula-indicator":
        grid = interior_grid(dim=model.dim) if grid is None else _u_grid(grid, model.dim)
        return [InfluenceFunction(kind, model, tuple(float(v) for v in u), **options) for u in grid]
    if kind in ("kendall-smooth", "copula-smooth"):
        if cls is None or not cls.differentiable:
            raise DomainError("smooth influence functions need a differentiable class")
        return [InfluenceFunction(kind, model, (i,), member=m, **options) for i, m in enumerate(cls.members)]
    raise UnsupportedKindError(f"unknown influence kind {kind!r}")


@dataclass(frozen=True, eq=False)
class CovarianceEstimate:
    matrix: np.ndarray
    se: np.ndarray
    means: np.ndarray
    mc_size: int
    seed: int

    def to_dict(self) -> dict:
        return jsonable({"matrix": self.matrix, "se": self.se, "means": self.means,
                         "mc_size": self.mc_size, "seed": self.seed})


def covariance_with_se(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample covariance of the rows of ``values`` (shape ``(m, N)``) and entrywise standard errors."""
    values = np.asarray(values, dtype=float)
    n = values.shape[1]
    means = values.mean(axis=1)
    centred = values - means[:, None]
    cov = centred @ centred.T / n
    m = values.shape[0]
    se = np.empty((m, m))
    for i in range(m):
        prod = centred[i] * centred[i:]
        se[i, i:] = prod.std(axis=1, ddof=1) / math.sqrt(n)
        se[i:, i] = se[i, i:]
    cov = 0.5 * (cov + cov.T)
    return cov, se, means


def limit_covariance(influences, mc_size: int = ORACLE_DRAWS, seed: int = 0, model: DataModel | None = None,
                     chunk: int = 250_000) -> CovarianceEstimate:
    """``P f_s f_t - P f_s P f_t`` over the influence family, by ``mc_size`` model draws."""
    influences = list(influences)
    if not influences:
        raise DomainError("empty influence family")
    model = model or influences[0].model
    rng = rng_for(seed, "limit-covariance", model.label())
    blocks = []
    remaining = int(mc_size)
    while remaining > 0:
        m = min(chunk, remaining)
        x = draw(model, m, rng)
        blocks.append(np.vstack([f(x) for f in influences]))
        remaining -= m
    cov, se, means = covariance_with_se(np.hstack(blocks))
    return CovarianceEstimate(cov, se, means, int(mc_size), int(seed))


def _cholesky_with_jitter(cov: np.ndarray) -> tuple[np.ndarray, float]:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise DomainError("covariance must be a square matrix")
    if not np.allclose(cov, cov.T, atol=1e-12, rtol=1e-10):
        raise DomainError("covariance must be symmetric")
    if not np.any(cov):
        return np.zeros_like(cov), 0.0
    try:
        return np.linalg.cholesky(cov), 0.0
    except np.linalg.LinAlgError:
        pass
    jitter = JITTER_START
    eye = np.eye(cov.shape[0])
    while jitter <= JITTER_MAX * (1 + 1e-9):
        try:
            return np.linalg.cholesky(cov + jitter * eye), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise NonPSDError(f"covariance is not positive semidefinite even with jitter {JITTER_MAX:g}")


def simulate_limit(cov, reps: int, seed: int, grid=None, kind: str = "limit") -> list[ProcessPath]:
    """``reps`` draws of the centred Gaussian vector with covariance ``cov``."""
    factor, jitter = _cholesky_with_jitter(cov)
    m = factor.shape[0]
    grid = np.arange(m, dtype=float) if grid is None else np.asarray(grid, dtype=float)
    z = rng_for(seed, "simulate-limit").standard_normal((int(reps), m))
    draws = z @ factor.T
    meta = {"seed": int(seed), "jitter": jitter}
    return [ProcessPath(kind, grid, row, {**meta, "rep": i}) for i, row in enumerate(draws)]


# --------------------------------------------------------------------------- replication

PROCESS_KINDS = ("kendall", "copula", "residual", "smooth-kendall", "smooth-copula")


def replicate_process(model: DataModel, kind: str, n: int, reps: int, seed: int, grid=None,
                      cls: FunctionClass | None = None, degree: int = 1,
                      threads: int | None = None) -> np.ndarray:
    """Matrix ``(reps, m)`` of independent process paths with derived per-replication seeds."""

    def one(rep, rng):
        s = Sample(draw(model, n, rng), provenance=f"{model.label()} rep={rep}")
        if kind == "kendall":
            return kendall_process(s, model, grid).values
        if kind == "copula":
            return copula_process(s, model, grid).values
        if kind == "residual":
            return residual_process(s, model, degree, grid).values
        if kind == "smooth-kendall":
            return smooth_indexed_process(s, model, cls, "kendall").values
        if kind == "smooth-copula":
            return smooth_indexed_process(s, model, cls, "copula").values
        raise UnsupportedKindError(f"unknown process kind {kind!r}")

    if kind not in PROCESS_KINDS:
        raise UnsupportedKindError(f"unknown process kind {kind!r}")
    return np.vstack(replicate(one, int(reps), seed, f"{kind}:n={n}", threads))
