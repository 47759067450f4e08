"""Generative data models that supply ground truth.

Three kinds are supported:

* ``independence`` -- the product copula on ``[0, 1]^d``;
* ``clayton`` -- the bivariate Clayton copula with parameter ``alpha > 0``;
* ``regression`` -- ``Y = g(X) + e`` with ``X ~ Uniform(0, 1)``, polynomial
  ``g`` and centred normal noise.

For copula kinds the joint distribution function ``C`` plays the role of the
true nuisance function (the thing the ECDF estimates), and the Kendall
distribution ``K(t) = P(C(X) <= t)`` is the law of the true pseudo-level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special, stats

from ._dominance import dominance_counts
from .errors import (BoundaryError, DomainError, EstimationError,
                     UnsupportedKindError)

# Documented numerical constants; every public function takes an override.
GRAD_STEP = 1e-5
DENSITY_STEP = 1e-4
BAND_WIDTH = 1e-3
BAND_DRAWS = 10**6
ORACLE_BAND_DRAWS = 10**7
_STREAM_CHUNK = 10**6

COPULA_KINDS = ("independence", "clayton")
MODEL_KINDS = COPULA_KINDS + ("regression",)


@dataclass(frozen=True)
class DataModel:
    kind: str
    dim: int
    alpha: float | None = None
    coeffs: tuple[float, ...] | None = None
    noise_sd: float | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise UnsupportedKindError(f"unknown model kind {self.kind!r}")
        if int(self.dim) < 1:
            raise DomainError("dimension must be a positive integer")
        if self.kind == "clayton":
            if self.dim != 2:
                raise DomainError("Clayton copula is only supported for d = 2")
            if self.alpha is None or not self.alpha > 0 or not math.isfinite(self.alpha):
                raise DomainError("Clayton requires alpha > 0")
        if self.kind == "regression":
            if not self.coeffs:
                raise DomainError("regression model needs at least one coefficient")
            if self.noise_sd is None or self.noise_sd < 0:
                raise DomainError("regression noise_sd must be >= 0")
            if self.dim != 2:
                raise DomainError("regression samples are (x, y) pairs, dim must be 2")

    @classmethod
    def independence(cls, d: int = 2) -> "DataModel":
        return cls("independence", int(d))

    @classmethod
    def clayton(cls, alpha: float) -> "DataModel":
        return cls("clayton", 2, alpha=float(alpha))

    @classmethod
    def regression(cls, coeffs, noise_sd: float = 1.0) -> "DataModel":
        return cls("regression", 2, coeffs=tuple(float(c) for c in coeffs), noise_sd=float(noise_sd))

    @property
    def is_copula(self) -> bool:
        return self.kind in COPULA_KINDS

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "d": self.dim}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.coeffs is not None:
            out["coeffs"] = list(self.coeffs)
        if self.noise_sd is not None:
            out["noise_sd"] = self.noise_sd
        return out

    def label(self) -> str:
        if self.kind == "clayton":
            return f"clayton(alpha={self.alpha:g})"
        if self.kind == "regression":
            return f"regression(coeffs={list(self.coeffs)}, sd={self.noise_sd:g})"
        return f"independence(d={self.dim})"


@dataclass(frozen=True, eq=False)
class Sample:
    """``n`` i.i.d. observation vectors.  The row array is read-only."""

    rows: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float, copy=True)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise DomainError("a sample needs at least one row")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.n


def _require_copula(model: DataModel, what: str):
    if not model.is_copula:
        raise UnsupportedKindError(f"{what} is not defined for model kind {model.kind!r}")


def _as_points(model: DataModel, u) -> tuple[np.ndarray, bool]:
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != model.dim:
        raise DomainError(f"expected points of dimension {model.dim}, got {arr.shape[-1]}")
    return arr, scalar


def copula_cdf(model: DataModel, u):
    """Copula distribution function ``C(u)``; accepts one point or an (N, d) array."""
    _require_copula(model, "copula_cdf")
    pts, scalar = _as_points(model, u)
    if np.any(~np.isfinite(pts)) or np.any(pts < 0.0) or np.any(pts > 1.0):
        raise DomainError("copula arguments must lie in [0, 1]^d")
    if model.kind == "independence":
        out = np.prod(pts, axis=1)
    else:
        a = model.alpha
        with np.errstate(divide="ignore", over="ignore"):
            s = np.sum(pts ** (-a), axis=1) - (model.dim - 1)
            out = np.where(np.any(pts == 0.0, axis=1), 0.0, s ** (-1.0 / a))
    return float(out[0]) if scalar else out


eta0 = copula_cdf


def numeric_grad_cdf(model: DataModel, u, step: float = GRAD_STEP):
    """Central-difference gradient of ``C``; the step is clipped to stay in the cube."""
    pts, scalar = _as_points(model, u)
    grads = np.empty_like(pts)
    for j in range(model.dim):
        h = np.minimum(step, np.minimum(pts[:, j], 1.0 - pts[:, j]))
        if np.any(h <= 0):
            raise BoundaryError("gradient requires interior points")
        up, dn = pts.copy(), pts.copy()
        up[:, j] += h
        dn[:, j] -= h
        grads[:, j] = (copula_cdf(model, up) - copula_cdf(model, dn)) / (2.0 * h)
    return grads[0] if scalar else grads


def grad_cdf(model: DataModel, u):
    """Gradient of the copula, analytic for both supported kinds."""
    _require_copula(model, "grad_cdf")
    pts, scalar = _as_points(model, u)
    if np.any(pts <= 0.0) or np.any(pts >= 1.0):
        raise BoundaryError("grad_cdf needs u strictly inside (0, 1)^d")
    if model.kind == "independence":
        d = model.dim
        grads = np.empty_like(pts)
        for j in range(d):
            grads[:, j] = np.prod(np.delete(pts, j, axis=1), axis=1) if d > 1 else 1.0
    else:
        a = model.alpha
        s = np.sum(pts ** (-a), axis=1) - 1.0
        grads = pts ** (-a - 1.0) * (s ** (-1.0 / a - 1.0))[:, None]
    return grads[0] if scalar else grads


def sample(model: DataModel, n: int, seed: int) -> Sample:
    """Draw ``n`` i.i.d. rows; identical ``(model, n, seed)`` gives identical rows."""
    if int(n) < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.default_rng(seed)
    rows = draw(model, int(n), rng)
    return Sample(rows, provenance=f"{model.label()} seed={seed}")


def draw(model: DataModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Raw (n, d) draws from ``rng``; the building block of :func:`sample`."""
    if model.kind == "independence":
        return rng.random((n, model.dim))
    if model.kind == "clayton":
        u1 = rng.random(n)
        w = rng.random(n)
        return from_uniform(model, np.column_stack([u1, w]))
    x = rng.random(n)
    y = regression_truth(model, x) + model.noise_sd * rng.standard_normal(n)
    return np.column_stack([x, y])


def from_uniform(model: DataModel, v) -> np.ndarray:
    """Map points of the open unit cube to model draws (the sampler's transform).

    Clayton uses the conditional-distribution method: ``U1 = V1`` and ``U2``
    inverts ``dC/du1(U1, .)`` at ``V2``.  Regression maps ``V2`` through the
    normal quantile function.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if model.kind == "independence":
        return v.copy()
    if model.kind == "clayton":
        a = model.alpha
        u1, w = v[:, 0], v[:, 1]
        u2 = ((w ** (-a / (1.0 + a)) - 1.0) * u1 ** (-a) + 1.0) ** (-1.0 / a)
        return np.column_stack([u1, u2])
    x = v[:, 0]
    return np.column_stack([x, regression_truth(model, x) + model.noise_sd * special.ndtri(v[:, 1])])


def expectation(model: DataModel, func, nodes: int = 96) -> float:
    """``E func(X)`` by tensor Gauss-Legendre quadrature through :func:`from_uniform`.

    Accurate for smooth ``func``; use closed forms for indicators.
    """
    x, w = np.polynomial.legendre.leggauss(int(nodes))
    x, w = 0.5 * (x + 1.0), 0.5 * w
    mesh = np.meshgrid(*([x] * model.dim), indexing="ij")
    wmesh = np.meshgrid(*([w] * model.dim), indexing="ij")
    pts = np.column_stack([m.reshape(-1) for m in mesh])
    weights = np.prod(np.column_stack([m.reshape(-1) for m in wmesh]), axis=1)
    return float(np.asarray(func(from_uniform(model, pts)), dtype=float) @ weights)


def _generator(model: DataModel, t):
    """Archimedean generator phi with phi(1) = 0 and phi(0) = inf (bivariate)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        if model.kind == "independence":
            return -np.log(t)
        return (t ** (-model.alpha) - 1.0) / model.alpha


def kendall_cdf(model: DataModel, t):
    """``K(t) = P(C(X) <= t)``.

    Independence in ``d`` dimensions: ``t * sum_{k<d} (-ln t)^k / k!``
    (``t - t ln t`` when d = 2).  Clayton: ``t + (t - t^(alpha+1)) / alpha``.
    """
    _require_copula(model, "kendall_cdf")
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("kendall_cdf needs t in [0, 1]")
    pos = np.where(arr > 0.0, arr, 1.0)
    if model.kind == "independence":
        ell = -np.log(pos)
        acc = np.zeros_like(pos)
        for k in range(model.dim):
            acc = acc + ell ** k / math.factorial(k)
        out = pos * acc
    else:
        a = model.alpha
        out = pos + (pos - pos ** (a + 1.0)) / a
    out = np.where(arr > 0.0, np.clip(out, 0.0, 1.0), 0.0)
    return float(out) if np.ndim(t) == 0 else out


def kendall_density(model: DataModel, t, step: float | None = None):
    """Density ``k`` of the Kendall distribution on (0, 1).

    Analytic for both supported kinds; pass ``step`` to force a central
    difference of :func:`kendall_cdf` instead.
    """
    _require_copula(model, "kendall_density")
    arr = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("kendall_density needs t in the open interval (0, 1)")
    if step is not None:
        h = np.minimum(step, np.minimum(arr, 1.0 - arr) / 2.0)
        out = (kendall_cdf(model, arr + h) - kendall_cdf(model, arr - h)) / (2.0 * h)
    elif model.kind == "independence":
        out = (-np.log(arr)) ** (model.dim - 1) / math.factorial(model.dim - 1)
    else:
        a = model.alpha
        out = (a + 1.0) * (1.0 - arr ** a) / a
    return float(out) if np.ndim(t) == 0 else out


@lru_cache(maxsize=64)
def _band_draws(model: DataModel, theta: float, n_draws: int, bandwidth: float, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    kept = []
    remaining = n_draws
    while remaining > 0:
        m = min(_STREAM_CHUNK, remaining)
        x = draw(model, m, rng)
        lvl = copula_cdf(model, x)
        kept.append(x[np.abs(lvl - theta) <= bandwidth])
        remaining -= m
    out = np.concatenate(kept, axis=0)
    out.setflags(write=False)
    return out


def band_draws(model: DataModel, theta: float, n_draws: int = BAND_DRAWS,
               bandwidth: float = BAND_WIDTH, seed: int = 0) -> np.ndarray:
    """Model draws whose level ``C(X)`` lies within ``bandwidth`` of ``theta`` (cached)."""
    _require_copula(model, "band conditioning")
    if not 0.0 < theta < 1.0:
        raise DomainError("conditioning level must lie in (0, 1)")
    return _band_draws(model, float(theta), int(n_draws), float(bandwidth), int(seed))


def conditional_expectation(model: DataModel, func, theta: float, n_draws: int = BAND_DRAWS,
                            bandwidth: float = BAND_WIDTH, seed: int = 0) -> tuple[float, float]:
    """Band-conditioning estimate of ``E[func(X) | C(X) = theta]`` with its standard error."""
    kept = band_draws(model, theta, n_draws, bandwidth, seed)
    if kept.shape[0] == 0:
        raise EstimationError(
            f"empty band: no draws with |C(X) - {theta}| <= {bandwidth} among {n_draws}")
    vals = np.asarray(func(kept), dtype=float)
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("inf")
    return float(vals.mean()), se


def conditional_indicator_expectation(model: DataModel, x, theta: float,
                                      n_draws: int = BAND_DRAWS, bandwidth: float = BAND_WIDTH,
                                      seed: int = 0):
    """``E[1{x <= X} | C(X) = theta]`` by band conditioning.

    ``x`` may be a single point (returns a float) or an (N, d) array (returns
    an array); the band draws are shared across all ``x``.
    """
    _require_copula(model, "conditional_indicator_expectation")
    pts, scalar = _as_points(model, x)
    kept = band_draws(model, theta, n_draws, bandwidth, seed)
    if kept.shape[0] == 0:
        raise EstimationError(
            f"empty band: no draws with |C(X) - {theta}| <= {bandwidth} among {n_draws}; "
            "increase n_draws or bandwidth")
    # x <= X componentwise  <=>  -X <= -x
    frac = dominance_counts(-kept, -pts) / kept.shape[0]
    return float(frac[0]) if scalar else frac


def conditional_indicator_expectation_exact(model: DataModel, x, theta: float):
    """Closed form of ``E[1{x <= X} | C(X) = theta]`` for bivariate Archimedean copulas.

    Given ``C(X) = theta`` the split ``phi(X1) / phi(theta)`` is uniform, so the
    event ``x <= X`` is ``1 - phi(x2)/phi(theta) <= V <= phi(x1)/phi(theta)`` for
    a uniform ``V``, with each bound clipped to ``[0, 1]``.
    """
    _require_copula(model, "conditional_indicator_expectation_exact")
    if model.dim != 2:
        raise UnsupportedKindError("level-curve formula is bivariate only")
    if not 0.0 < theta < 1.0:
        raise DomainError("conditioning level must lie in (0, 1)")
    pts, scalar = _as_points(model, x)
    phi = _generator(model, np.clip(pts, 0.0, 1.0))
    level = _generator(model, theta)
    upper = np.minimum(phi[:, 0] / level, 1.0)
    lower = np.maximum(1.0 - phi[:, 1] / level, 0.0)
    val = np.clip(upper - lower, 0.0, 1.0)
    return float(val[0]) if scalar else val


def regression_truth(model: DataModel, x):
    """True regression function ``g(x) = sum_k c_k x^k`` (Horner)."""
    if model.kind != "regression":
        raise UnsupportedKindError("regression_truth needs a regression model")
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for c in reversed(model.coeffs):
        acc = acc * x + c
    return float(acc) if acc.ndim == 0 else acc


def noise_cdf(model: DataModel, e):
    """CDF of the regression noise; a unit step at 0 when ``noise_sd == 0``."""
    if model.kind != "regression":
        raise UnsupportedKindError("noise_cdf needs a regression model")
    e = np.asarray(e, dtype=float)
    if model.noise_sd == 0:
        out = (e >= 0).astype(float)
    else:
        out = special.ndtr(e / model.noise_sd)
    return float(out) if out.ndim == 0 else out


def kendall_tau(model: DataModel) -> float:
    """Population Kendall tau (``alpha / (alpha + 2)`` for Clayton, 0 for independence)."""
    _require_copula(model, "kendall_tau")
    return 0.0 if model.kind == "independence" else model.alpha / (model.alpha + 2.0)


def marginal_ks(sample: Sample) -> np.ndarray:
    """Kolmogorov-Smirnov distance of each column to Uniform(0, 1)."""
    return np.array([stats.kstest(sample.rows[:, j], "uniform").statistic for j in range(sample.dim)])
