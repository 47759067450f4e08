"""Finite index classes, envelopes and entropy computations.

Classes are finite tuples of members.  A member is a small frozen dataclass
with ``__call__(r)`` (values at the rows of ``r``) and, where it exists,
``grad(r)``.  Index points ``r`` live in ``R^dim``: ``dim = 1`` for functions of
the Kendall pseudo-level, ``dim = d`` for copula pseudo-observations.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import DomainError, UnsupportedKindError
from .report import FAIL, PASS, VerificationReport
from .seeding import rng_for

CLASS_KINDS = ("indicator-grid", "lipschitz", "survival", "constants", "union")


def _as_r(r, dim: int) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr[:, None] if dim == 1 else arr[None, :]
    if arr.shape[1] != dim:
        raise DomainError(f"index points must have dimension {dim}, got {arr.shape[1]}")
    return arr


# --------------------------------------------------------------------------- members

@dataclass(frozen=True)
class Indicator:
    """``1{r <= threshold}`` componentwise (the lower-orthant indicator)."""

    threshold: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.threshold)

    def __call__(self, r) -> np.ndarray:
        r = _as_r(r, self.dim)
        return np.all(r <= np.asarray(self.threshold), axis=1).astype(float)


@dataclass(frozen=True)
class StepSurvival:
    """Survival function of a discrete subprobability: ``sum_j w_j 1{r <= t_j}``.

    Nonincreasing in every coordinate; a single unit atom is an
    :class:`Indicator`.
    """

    atoms: tuple[tuple[float, ...], ...]
    weights: tuple[float, ...]
    dim: int = 1

    def __call__(self, r) -> np.ndarray:
        r = _as_r(r, self.dim)
        out = np.zeros(r.shape[0])
        for t, w in zip(self.atoms, self.weights):
            out += w * np.all(r <= np.asarray(t), axis=1)
        return out


@dataclass(frozen=True)
class CosineSum:
    """``sum_k c_k cos(<w_k, r> + b_k)``; Lipschitz constant at most ``sum |c_k| ||w_k||``."""

    coef: tuple[float, ...]
    freq: tuple[tuple[float, ...], ...]
    phase: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.freq[0]) if self.freq else 1

    def __call__(self, r) -> np.ndarray:
        r = _as_r(r, self.dim)
        if not self.coef:
            return np.zeros(r.shape[0])
        arg = r @ np.asarray(self.freq).T + np.asarray(self.phase)
        return np.cos(arg) @ np.asarray(self.coef)

    def grad(self, r) -> np.ndarray:
        r = _as_r(r, self.dim)
        if not self.coef:
            return np.zeros_like(r)
        w = np.asarray(self.freq)
        arg = r @ w.T + np.asarray(self.phase)
        return -(np.sin(arg) * np.asarray(self.coef)) @ w

    @property
    def lipschitz_bound(self) -> float:
        return float(sum(abs(c) * math.hypot(*w) for c, w in zip(self.coef, self.freq)))

    @property
    def sup_bound(self) -> float:
        return float(sum(abs(c) for c in self.coef))


@dataclass(frozen=True)
class Affine:
    """``<slope, r> + intercept``."""

    slope: tuple[float, ...]
    intercept: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.slope)

    def __call__(self, r) -> np.ndarray:
        r = _as_r(r, self.dim)
        return r @ np.asarray(self.slope) + self.intercept

    def grad(self, r) -> np.ndarray:
        r = _as_r(r, self.dim)
        return np.broadcast_to(np.asarray(self.slope, dtype=float), r.shape).copy()


@dataclass(frozen=True)
class Constant:
    value: float
    dim: int = 1

    def __call__(self, r) -> np.ndarray:
        r = _as_r(r, self.dim)
        return np.full(r.shape[0], float(self.value))

    def grad(self, r) -> np.ndarray:
        return np.zeros_like(_as_r(r, self.dim))


# --------------------------------------------------------------------------- envelopes

@dataclass(frozen=True)
class EnvelopeFunction:
    """Pointwise bound ``F(x) >= |f(x)|`` for every member of a class."""

    rule: Callable[[np.ndarray], np.ndarray]
    label: str

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.rule(np.asarray(x, dtype=float)), dtype=float)


def constant_envelope(c: float = 1.0) -> EnvelopeFunction:
    c = float(c)

    def rule(x):
        x = np.asarray(x)
        return np.full(x.shape[0] if x.ndim else 1, c)

    return EnvelopeFunction(rule, f"constant({c:g})")


def composition_envelope(theta_env: Callable, n: int, dim: int = 1) -> EnvelopeFunction:
    """``F_n(y, z) = Theta_env(y + z/sqrt(n)) + Theta_env(y)`` on rows ``(y, z)`` of width ``2*dim``."""
    scale = 1.0 / math.sqrt(n)

    def rule(x):
        x = np.atleast_2d(x)
        y, z = x[:, :dim], x[:, dim:2 * dim]
        return np.asarray(theta_env(y + scale * z), float) + np.asarray(theta_env(y), float)

    return EnvelopeFunction(rule, f"composition(n={n})")


def lipschitz_envelope(delta: float, n: int) -> EnvelopeFunction:
    """Constant ``delta / sqrt(n)``: the envelope of Lipschitz differences."""
    return constant_envelope(delta / math.sqrt(n))


# --------------------------------------------------------------------------- classes

@dataclass(frozen=True)
class FunctionClass:
    kind: str
    members: tuple
    dim: int
    envelope: EnvelopeFunction
    spec: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in CLASS_KINDS:
            raise UnsupportedKindError(f"unknown class kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.members)

    def evaluate(self, r) -> np.ndarray:
        """Matrix of member values, shape ``(len(self), N)``."""
        r = _as_r(r, self.dim)
        if not self.members:
            return np.zeros((0, r.shape[0]))
        return np.vstack([m(r) for m in self.members])

    @property
    def differentiable(self) -> bool:
        return all(hasattr(m, "grad") for m in self.members)

    def to_config(self) -> dict:
        return dict(self.spec) if self.spec else {"kind": self.kind, "count": len(self)}


def indicator_grid(grid) -> FunctionClass:
    """``{1_{(-inf, t]} : t in grid}``; a 1-d grid gives pseudo-level indicators."""
    g = np.asarray(grid, dtype=float)
    g2 = g[:, None] if g.ndim == 1 else g
    members = tuple(Indicator(tuple(float(v) for v in row)) for row in g2)
    spec = {"kind": "indicator-grid", "grid": g.tolist()}
    return FunctionClass("indicator-grid", members, g2.shape[1], constant_envelope(1.0), spec)


def constant_class(values=(0.0,), dim: int = 1) -> FunctionClass:
    members = tuple(Constant(float(v), dim) for v in values)
    bound = max([abs(float(v)) for v in values] or [0.0])
    spec = {"kind": "constants", "values": [float(v) for v in values], "dim": dim}
    return FunctionClass("constants", members, dim, constant_envelope(bound), spec)


def lipschitz_member(coef, freq, phase) -> CosineSum:
    """Cosine sum rescaled so that ``|theta| <= 1`` and the Lipschitz constant is ``<= 1``."""
    coef = np.asarray(coef, dtype=float).reshape(-1)
    freq = np.atleast_2d(np.asarray(freq, dtype=float))
    if freq.shape[0] != coef.shape[0]:
        freq = freq.T
    phase = np.asarray(phase, dtype=float).reshape(-1)
    lip = float(np.sum(np.abs(coef) * np.linalg.norm(freq, axis=1)))
    sup = float(np.sum(np.abs(coef)))
    scale = max(lip, sup)
    if scale > 0:
        coef = coef / scale
    return CosineSum(tuple(coef.tolist()), tuple(tuple(w) for w in freq.tolist()), tuple(phase.tolist()))


def make_lipschitz_family(seed: int, count: int, dim: int = 1, terms: int = 3,
                          max_freq: float = 6.0) -> FunctionClass:
    """``count`` random bounded, 1-Lipschitz cosine sums on ``R^dim``; deterministic in ``seed``."""
    if count < 1:
        raise DomainError("a Lipschitz family needs at least one member")
    rng = rng_for(seed, "lipschitz-family", dim, terms)
    members = []
    for _ in range(count):
        coef = rng.standard_normal(terms)
        freq = rng.uniform(-max_freq, max_freq, size=(terms, dim))
        phase = rng.uniform(0.0, 2.0 * math.pi, size=terms)
        members.append(lipschitz_member(coef, freq, phase))
    spec = {"kind": "lipschitz", "seed": int(seed), "count": int(count), "dim": int(dim), "terms": int(terms)}
    return FunctionClass("lipschitz", tuple(members), dim, constant_envelope(1.0), spec)


def lipschitz_class(members, dim: int = 1) -> FunctionClass:
    """Wrap hand-built differentiable members (cosine sums, affine maps, constants)."""
    return FunctionClass("lipschitz", tuple(members), dim, constant_envelope(1.0),
                         {"kind": "lipschitz", "count": len(members), "dim": dim})


def make_survival_family(points, weights) -> FunctionClass:
    """Members ``theta(x) = sum_j w_j 1{x <= t_j}``: survival functions of subprobabilities.

    ``weights`` is one weight vector (a single member) or a matrix with one row
    per member; each row must be nonnegative with sum at most one.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        dim = pts.shape[1] if pts.size else 1
        member = StepSurvival((), (), dim)
        return FunctionClass("survival", (member,), dim, constant_envelope(0.0),
                             {"kind": "survival", "points": [], "weights": []})
    w = np.atleast_2d(w)
    if w.shape[1] != pts.shape[0]:
        raise DomainError("weights must have one column per atom")
    if np.any(w < 0):
        raise DomainError("survival weights must be nonnegative")
    if np.any(w.sum(axis=1) > 1.0 + 1e-12):
        raise DomainError("weights sum to more than one: not a subprobability")
    atoms = tuple(tuple(float(v) for v in row) for row in pts)
    members = tuple(StepSurvival(atoms, tuple(float(v) for v in row), pts.shape[1]) for row in w)
    spec = {"kind": "survival", "points": pts.tolist(), "weights": w.tolist()}
    return FunctionClass("survival", members, pts.shape[1], constant_envelope(float(w.sum(axis=1).max())), spec)


def union(a: FunctionClass, b: FunctionClass) -> FunctionClass:
    if a.dim != b.dim:
        raise DomainError("cannot unite classes on different domains")

    def rule(x):
        return np.maximum(a.envelope(x), b.envelope(x))

    env = EnvelopeFunction(rule, f"max({a.envelope.label}, {b.envelope.label})")
    return FunctionClass("union", a.members + b.members, a.dim, env,
                         {"kind": "union", "parts": [a.to_config(), b.to_config()]})


def class_from_config(cfg: dict) -> FunctionClass:
    """Build a class from its serialised form (the ``class`` block of a config)."""
    kind = cfg.get("kind")
    if kind == "indicator-grid":
        return indicator_grid(cfg["grid"])
    if kind == "lipschitz":
        return make_lipschitz_family(int(cfg["seed"]), int(cfg["count"]), int(cfg.get("dim", 1)),
                                     int(cfg.get("terms", 3)))
    if kind == "survival":
        return make_survival_family(cfg["points"], cfg["weights"])
    if kind == "constants":
        return constant_class(cfg.get("values", [0.0]), int(cfg.get("dim", 1)))
    raise UnsupportedKindError(f"class kind {kind!r} cannot be built from config")


# --------------------------------------------------------------------------- measures

@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure on finitely many points of the index domain."""

    points: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.shape[0] == 0 or w.shape[0] != pts.shape[0]:
            raise DomainError("a discrete measure needs matching, nonempty points and weights")
        if np.any(w < 0) or w.sum() <= 0:
            raise DomainError("measure weights must be nonnegative with positive total")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w / w.sum())


def empirical_measure(points, label: str = "empirical") -> DiscreteMeasure:
    pts = np.asarray(points, dtype=float)
    return DiscreteMeasure(pts, np.ones(pts.shape[0]), label)


def point_mass(x, label: str = "point-mass") -> DiscreteMeasure:
    return DiscreteMeasure(np.atleast_2d(np.asarray(x, dtype=float)), np.ones(1), label)


def two_point(x, y, p: float = 0.5, label: str = "two-point") -> DiscreteMeasure:
    return DiscreteMeasure(np.vstack([np.atleast_1d(x), np.atleast_1d(y)]), np.array([p, 1 - p]), label)


def stress_measures(dim: int, seed: int, count: int = 8) -> list[DiscreteMeasure]:
    """Point masses and two-point measures placed at random in the unit cube."""
    rng = rng_for(seed, "stress-measures", dim)
    out = []
    for _ in range(count):
        out.append(point_mass(rng.random(dim)))
        out.append(two_point(rng.random(dim), rng.random(dim), float(rng.uniform(0.1, 0.9))))
    return out


# --------------------------------------------------------------------------- covering

def _l2_distances(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    sq = (values ** 2) @ weights
    gram = (values * weights) @ values.T
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0)
    return np.sqrt(d2)


def _is_chain(cls: FunctionClass) -> bool:
    return cls.kind == "indicator-grid" and cls.dim == 1


def _chain_cover(masses: np.ndarray, radius: float) -> list[int]:
    """Optimal member-centred cover of points on a line (``|m_i - m_j| <= radius``)."""
    order = np.argsort(masses, kind="stable")
    m = masses[order]
    centers = []
    i = 0
    while i < len(m):
        j = int(np.searchsorted(m, m[i] + radius, side="right")) - 1
        centers.append(int(order[j]))
        i = int(np.searchsorted(m, m[j] + radius, side="right"))
    return centers


def greedy_net(cls: FunctionClass, eps: float, measure: DiscreteMeasure) -> list[int]:
    """Indices of the centres of a greedy ``eps``-net in ``L2(measure)``.

    Members are scanned in order and a new centre opens whenever no existing
    centre is within ``eps``.
    """
    dist = _l2_distances(cls.evaluate(measure.points), measure.weights)
    return _greedy_from_distances(dist, eps)


def _greedy_from_distances(dist: np.ndarray, eps: float) -> list[int]:
    centers: list[int] = []
    for i in range(dist.shape[0]):
        if not centers or dist[i, centers].min() > eps:
            centers.append(i)
    return centers


def covering_number(cls: FunctionClass, eps: float, measure: DiscreteMeasure, method: str = "auto") -> int:
    """Size of an ``eps``-cover of ``cls`` in ``L2(measure)`` with centres among the members.

    This is an upper bound on the covering number.  For one-dimensional
    indicator grids (``method="auto"``) the members form a chain whose squared
    L2 distance is additive, so the sweep in :func:`_chain_cover` is exactly
    minimal; otherwise the greedy scan of :func:`greedy_net` is used.
    """
    if len(cls) == 0:
        raise DomainError("covering number of an empty class")
    if not eps > 0:
        raise DomainError("eps must be positive")
    return len(_cover_centres(cls, eps, measure, method))


def _cover_centres(cls, eps, measure, method):
    if method == "auto":
        method = "chain" if _is_chain(cls) else "greedy"
    if method == "chain":
        if not _is_chain(cls):
            raise UnsupportedKindError("chain covering needs a 1-d indicator grid")
        return _chain_cover(cls.evaluate(measure.points) @ measure.weights, eps * eps)
    if method == "greedy":
        return greedy_net(cls, eps, measure)
    raise DomainError(f"unknown covering method {method!r}")


def exact_covering_number(cls: FunctionClass, eps: float, measure: DiscreteMeasure, max_members: int = 12) -> int:
    """Minimum member-centred cover by exhaustive search (tiny classes only)."""
    m = len(cls)
    if m == 0:
        raise DomainError("covering number of an empty class")
    if m > max_members:
        raise DomainError(f"exhaustive search limited to {max_members} members")
    within = _l2_distances(cls.evaluate(measure.points), measure.weights) <= eps
    for size in range(1, m + 1):
        for combo in itertools.combinations(range(m), size):
            if np.all(within[list(combo)].any(axis=0)):
                return size
    return m


def envelope_norm(cls: FunctionClass, measure: DiscreteMeasure) -> float:
    env = cls.envelope(measure.points)
    return float(math.sqrt(np.sum(measure.weights * env ** 2)))


def _entropy_grid(levels: int) -> np.ndarray:
    return 2.0 ** -np.arange(levels, -1, -1, dtype=float)  # ascending, ends at 1


def _integrate_profile(grid: np.ndarray, vals: np.ndarray, delta: float) -> float:
    """Integral over ``[0, delta]`` of the piecewise-linear interpolant of ``vals``.

    The interpolant is fixed by the grid (not by ``delta``), so the result is
    nondecreasing in ``delta`` for a nonnegative integrand.
    """
    total = grid[0] * vals[0]  # constant extrapolation below the finest scale
    if delta <= grid[0]:
        return float(delta * vals[0])
    k = int(np.searchsorted(grid, delta, side="right")) - 1
    if k > 0:
        total += float(np.trapezoid(vals[:k + 1], grid[:k + 1]))
    if grid[k] < delta:
        v_delta = np.interp(delta, grid, vals)
        total += 0.5 * (vals[k] + v_delta) * (delta - grid[k])
    return float(total)


def entropy_profile(cls: FunctionClass, measures, levels: int = 30, method: str = "auto"):
    """``sup_Q sqrt(log N(eps ||F||_Q, F, L2(Q)))`` on the scales ``2^-k``, ``k = levels..0``.

    Returns ``(grid, values, skipped)``; measures under which the envelope has
    zero norm are skipped with a warning.
    """
    if len(cls) == 0:
        raise DomainError("entropy of an empty class")
    measures = list(measures)
    if not measures:
        raise DomainError("need at least one measure")
    grid = _entropy_grid(levels)
    best = np.zeros_like(grid)
    skipped = []
    for q in measures:
        norm = envelope_norm(cls, q)
        if norm == 0:
            warnings.warn(f"envelope has zero L2 norm under measure {q.label!r}; skipped", RuntimeWarning)
            skipped.append(q.label)
            continue
        if method == "auto" and _is_chain(cls):
            masses = cls.evaluate(q.points) @ q.weights
            counts = [len(_chain_cover(masses, (e * norm) ** 2)) for e in grid]
        else:
            dist = _l2_distances(cls.evaluate(q.points), q.weights)
            counts = [len(_greedy_from_distances(dist, e * norm)) for e in grid]
        best = np.maximum(best, np.sqrt(np.log(np.asarray(counts, dtype=float))))
    return grid, best, skipped


def uniform_entropy_integral(cls: FunctionClass, delta: float, measures, levels: int = 30,
                             method: str = "auto") -> float:
    """Uniform entropy integral ``J(delta)`` with the sup over ``Q`` taken over ``measures``.

    Because the sup runs over a finite family of measures the value is a lower
    bound of the true integral (up to the covering upper bound per measure).
    """
    if not 0 < delta <= 1:
        raise DomainError("delta must lie in (0, 1]")
    grid, vals, _ = entropy_profile(cls, measures, levels, method)
    return _integrate_profile(grid, vals, delta)


# --------------------------------------------------------------------------- bracketing

def _law_cdf(law):
    if hasattr(law, "kind"):
        from .models import kendall_cdf

        return lambda t: kendall_cdf(law, np.clip(t, 0.0, 1.0))
    if callable(law):
        return law
    raise DomainError("law must be a DataModel or a CDF callable")


def indicator_brackets(eps: float, law, grid=None) -> list[tuple[float, float]]:
    """Brackets ``[1_{(-inf, lo]}, 1_{(-inf, hi]}]`` of ``L2(P)`` size at most ``eps``.

    Without ``grid`` the brackets cover every threshold in ``[0, 1]``, with
    edges at the ``eps^2``-quantiles of the law; with a grid they cover only its
    members, built by a left-to-right sweep.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    cdf = _law_cdf(law)
    if grid is None:
        if eps >= 1:
            return [(0.0, 1.0)]
        count = math.ceil(1.0 / eps ** 2 - 1e-9)
        edges = [0.0]
        for j in range(1, count):
            target = j * eps ** 2
            edges.append(float(optimize.brentq(lambda t: float(cdf(t)) - target, 0.0, 1.0, xtol=1e-14)))
        edges.append(1.0)
        return list(zip(edges[:-1], edges[1:]))
    ts = np.sort(np.asarray(grid, dtype=float).reshape(-1))
    if ts.size == 0:
        raise DomainError("empty indicator grid")
    mass = np.asarray(cdf(ts), dtype=float)
    out = []
    i = 0
    while i < len(ts):
        j = int(np.searchsorted(mass, mass[i] + eps ** 2 * (1 + 1e-12), side="right")) - 1
        out.append((float(ts[i]), float(ts[j])))
        i = j + 1
    return out


def bracketing_number_indicators(eps: float, law, grid=None) -> int:
    """Number of brackets produced by :func:`indicator_brackets`."""
    if eps >= 1:
        return 1
    return len(indicator_brackets(eps, law, grid))


def bracketing_entropy_integral(delta: float, law, grid=None, levels: int = 30) -> float:
    """Bracketing entropy integral for the indicator class (constant envelope 1)."""
    if not 0 < delta <= 1:
        raise DomainError("delta must lie in (0, 1]")
    scales = _entropy_grid(levels)
    vals = np.array([math.sqrt(math.log(bracketing_number_indicators(e, law, grid))) for e in scales])
    return _integrate_profile(scales, vals, delta)


# --------------------------------------------------------------------------- Lindeberg

def lindeberg_check(envelope_for: Callable[[int], EnvelopeFunction], law_sampler, n_grid, eps: float,
                    mc_size: int = 100_000, seed: int = 0, bound_factor: float = 2.0,
                    tol: float = 1e-3) -> VerificationReport:
    """Monte Carlo check of ``P F_n^2 = O(1)`` and ``P F_n^2 1{F_n >= eps sqrt(n)} -> 0``.

    ``envelope_for(n)`` returns the envelope at sample size ``n``;
    ``law_sampler(rng, size)`` draws points of its domain.  Bounded means the
    second moment never exceeds ``bound_factor`` times its value at the first
    ``n``; vanishing means the truncated moments do not increase beyond noise
    and end within ``max(3 SE, tol)`` of zero.
    """
    n_grid = [int(n) for n in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise DomainError("n_grid must be increasing")
    rng = rng_for(seed, "lindeberg")
    x = law_sampler(rng, mc_size)
    second, second_se, trunc, trunc_se = [], [], [], []
    for n in n_grid:
        f = np.abs(envelope_for(n)(x))
        sq = f ** 2
        cut = sq * (f >= eps * math.sqrt(n))
        second.append(float(sq.mean()))
        second_se.append(float(sq.std(ddof=1) / math.sqrt(mc_size)))
        trunc.append(float(cut.mean()))
        trunc_se.append(float(cut.std(ddof=1) / math.sqrt(mc_size)))
    bounded = max(second) <= bound_factor * max(second[0], 1e-300)
    nonincreasing = all(b <= a + 3 * s for a, b, s in zip(trunc, trunc[1:], trunc_se[1:]))
    vanishing = nonincreasing and trunc[-1] <= max(3 * trunc_se[-1], tol)
    verdict = PASS if bounded and vanishing else FAIL
    return VerificationReport(
        name="lindeberg", grid_label="n", grid=n_grid, observed=trunc, se=trunc_se,
        trend={"bounded_second_moment": bounded, "truncated_vanishing": vanishing,
               "truncated_nonincreasing": nonincreasing},
        tolerance={"eps": eps, "bound_factor": bound_factor, "tol": tol},
        verdict=verdict, seed=seed, params={"mc_size": mc_size},
        details={"second_moment": second, "second_moment_se": second_se})
