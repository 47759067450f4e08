"""Monte Carlo and quadrature checks of the asymptotic conditions and limit identities.

Every check returns a :class:`~pseudoproc.report.VerificationReport` whose
verdict is a deterministic function of the recorded numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from .empirical import ls_polyfit
from .errors import DomainError, UnsupportedKindError
from .fclasses import Constant, FunctionClass, Indicator, StepSurvival
from .models import (DataModel, Sample, conditional_expectation, copula_cdf, draw, kendall_density,
                     noise_cdf, regression_truth)
from .processes import (CovarianceEstimate, ProcessPath, covariance_with_se, influence_family,
                        limit_covariance, population_means, replicate_process)
from .report import (FAIL, INCONCLUSIVE, PASS, VerificationReport, decreasing_within_noise,
                     loglog_slope, trend_to_zero)
from .seeding import derive_seed, replicate, rng_for

NEGLIGIBILITY_DECAY = 0.5
CONDITION_19_DECAY = 0.75
L2_ORACLE_DRAWS = 100_000
LEMMA_DRAWS = 10**7
HADAMARD_DRAWS = 10**6
_CHUNK = 10**6


# --------------------------------------------------------------------------- perturbations

@dataclass(frozen=True)
class PerturbationFunction:
    """A direction ``h_0`` on the data domain.

    ``tag`` is ``"zero"``, ``"constant"``, ``"composed"`` (``h o eta_0`` with
    continuous ``h``) or ``"rough"``; rough directions may violate the kernel
    continuity the limit lemmas rely on and are flagged in reports.
    """

    rule: Callable[[np.ndarray], np.ndarray]
    tag: str
    sup_bound: float
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.asarray(self.rule(x), dtype=float)
        return np.broadcast_to(out, (x.shape[0],) + out.shape[1:]).copy() if out.ndim <= 1 else out

    @property
    def flagged(self) -> bool:
        return self.tag == "rough"


def zero_perturbation() -> PerturbationFunction:
    return PerturbationFunction(lambda x: np.zeros(x.shape[0]), "zero", 0.0, "zero")


def constant_perturbation(c: float) -> PerturbationFunction:
    c = float(c)
    return PerturbationFunction(lambda x: np.full(x.shape[0], c), "constant", abs(c), f"constant({c:g})")


def composed_perturbation(model: DataModel, h: Callable, sup_bound: float, label: str = "") -> PerturbationFunction:
    """``h_0 = h o eta_0`` for a continuous ``h`` on ``[0, 1]``."""
    return PerturbationFunction(lambda x: np.asarray(h(copula_cdf(model, x)), dtype=float), "composed",
                                float(sup_bound), label or "composed")


def level_perturbation(model: DataModel) -> PerturbationFunction:
    """``h_0 = eta_0``, so that ``E(h_0(X) | eta_0(X) = s) = s``."""
    return composed_perturbation(model, lambda z: z, 1.0, "eta0")


def bridge_perturbation(model: DataModel, scale: float = 1.0) -> PerturbationFunction:
    """``h_0 = scale * sin(pi eta_0)``: a continuous bridge-shaped direction."""
    return composed_perturbation(model, lambda z: scale * np.sin(np.pi * z), abs(scale), f"bridge({scale:g})")


def rough_perturbation(rule: Callable, sup_bound: float, label: str = "rough") -> PerturbationFunction:
    return PerturbationFunction(rule, "rough", float(sup_bound), label)


def check_sup_bound(h: PerturbationFunction, points) -> bool:
    vals = h(points)
    return bool(np.all(np.isfinite(vals)) and np.max(np.abs(vals)) <= h.sup_bound + 1e-12)


# --------------------------------------------------------------------------- helpers

def _check_n_list(n_list) -> list[int]:
    ns = [int(n) for n in n_list]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError("n_list not increasing")
    return ns


def _median_se(values: np.ndarray) -> float:
    if values.shape[0] < 2:
        return float("inf")
    return float(math.sqrt(math.pi / 2.0) * values.std(ddof=1) / math.sqrt(values.shape[0]))


def _cell_masses(model: DataModel, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """``P(X in cell)`` for the rectangle grid spanned by the breakpoints ``xs`` and ``ys``."""
    if model.kind == "independence":
        return np.outer(np.diff(xs), np.diff(ys))
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    c = copula_cdf(model, np.column_stack([gx.ravel(), gy.ravel()])).reshape(gx.shape)
    return np.clip(np.diff(np.diff(c, axis=0), axis=1), 0.0, None)


def _rank_cells(rows: np.ndarray):
    """Ranks ``1..n`` per column and the breakpoints ``0, x_(1), ..., x_(n), 1``."""
    n = rows.shape[0]
    ranks = np.column_stack([stats.rankdata(rows[:, j], method="max").astype(np.int64) for j in range(2)])
    xs = np.concatenate(([0.0], np.sort(rows[:, 0]), [1.0]))
    ys = np.concatenate(([0.0], np.sort(rows[:, 1]), [1.0]))
    return n, ranks, xs, ys


def _negligibility_stat(model: DataModel, kind: str, cls: FunctionClass, rows: np.ndarray,
                        means: np.ndarray, estimator: str, degree: int = 1) -> float:
    """``sup_theta |G_n(theta(eta_n) - theta(eta_0))|`` for one sample.

    Both ``P_n`` parts are sample averages.  ``P theta(eta_n)`` is exact: in
    two dimensions ``eta_n`` is constant on the ``(n+1)^2`` cells cut out by the
    order statistics, so its law under ``P`` is a weighted count over cells.
    """
    n = rows.shape[0]
    if estimator == "truth":
        # eta_n := eta_0 on both the sample part and the population part
        if kind == "kendall":
            level = copula_cdf(model, rows)[:, None]
        elif kind == "copula":
            level = rows
        else:
            level = (rows[:, 1] - regression_truth(model, rows[:, 0]))[:, None]
        v = cls.evaluate(level).mean(axis=1)
        return float(math.sqrt(n) * np.max(np.abs((v - v) - (means - means))))
    if kind in ("kendall", "copula"):
        if rows.shape[1] != 2:
            raise UnsupportedKindError("exact negligibility is implemented for d = 2")
        n, ranks, xs, ys = _rank_cells(rows)
        mass = _cell_masses(model, xs, ys)
        if kind == "kendall":
            hits = np.zeros((n + 1, n + 1))
            np.add.at(hits, (ranks[:, 0], ranks[:, 1]), 1.0)
            counts = np.cumsum(np.cumsum(hits, axis=0), axis=1).astype(np.int64)
            eta_n = counts[ranks[:, 0], ranks[:, 1]] / n
            eta_0 = copula_cdf(model, rows)
            law = np.bincount(counts.ravel(), weights=mass.ravel(), minlength=n + 1)
            levels = np.arange(n + 1)[:, None] / n
            a = cls.evaluate(eta_n[:, None]).mean(axis=1) - cls.evaluate(eta_0[:, None]).mean(axis=1)
            b = (cls.evaluate(levels) - means[:, None]) @ law
        else:
            eta_n = ranks / n
            a = cls.evaluate(eta_n).mean(axis=1) - cls.evaluate(rows).mean(axis=1)
            gi, gj = np.meshgrid(np.arange(n + 1) / n, np.arange(n + 1) / n, indexing="ij")
            vals = cls.evaluate(np.column_stack([gi.ravel(), gj.ravel()]))
            b = (vals - means[:, None]) @ mass.ravel()
        return float(math.sqrt(n) * np.max(np.abs(a - b)))
    if kind == "residual":
        sample = Sample(rows)
        fit = ls_polyfit(sample, degree)
        resid_n = fit.residuals
        resid_0 = rows[:, 1] - regression_truth(model, rows[:, 0])
        a = cls.evaluate(resid_n[:, None]).mean(axis=1) - cls.evaluate(resid_0[:, None]).mean(axis=1)
        b = _residual_means(model, cls, fit) - means
        return float(math.sqrt(n) * np.max(np.abs(a - b)))
    raise UnsupportedKindError(f"unknown process kind {kind!r}")


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_GH_X, _GH_W = special.roots_hermitenorm(80)


def _residual_means(model: DataModel, cls: FunctionClass, fit=None) -> np.ndarray:
    """``E theta(Y - g_hat(X))`` (or ``E theta(e)`` when ``fit`` is None) for every member."""
    x = 0.5 * (_GL_X + 1.0)
    wx = 0.5 * _GL_W
    shift = np.zeros_like(x) if fit is None else regression_truth(model, x) - fit(x)
    out = []
    for m in cls.members:
        if isinstance(m, Constant):
            out.append(float(m.value))
        elif isinstance(m, (Indicator, StepSurvival)):
            atoms = [m.threshold] if isinstance(m, Indicator) else m.atoms
            weights = [1.0] if isinstance(m, Indicator) else m.weights
            val = sum(w * (noise_cdf(model, t[0] - shift) @ wx) for t, w in zip(atoms, weights))
            out.append(float(val))
        else:
            if model.noise_sd == 0:
                out.append(float(m(shift[:, None]) @ wx))
                continue
            e = model.noise_sd * _GH_X
            grid = (shift[:, None] + e[None, :]).reshape(-1, 1)
            vals = m(grid).reshape(len(x), len(e))
            out.append(float(wx @ vals @ (_GH_W / math.sqrt(2 * math.pi))))
    return np.array(out)


def _class_means(model: DataModel, kind: str, cls: FunctionClass) -> np.ndarray:
    if kind == "residual":
        if model.kind != "regression":
            raise UnsupportedKindError("residual checks need a regression model")
        return _residual_means(model, cls)
    return population_means(model, cls, kind)


# --------------------------------------------------------------------------- (1)

def check_negligibility(model: DataModel, kind: str, cls: FunctionClass, n_list, reps: int, seed: int,
                        estimator: str = "ecdf", decay_ratio: float = NEGLIGIBILITY_DECAY,
                        degree: int = 1, threads: int | None = None) -> VerificationReport:
    """Medians over ``reps`` samples of ``S_n = sup_theta |G_n(f_{theta,eta_n} - f_{theta,eta_0})|``.

    ``kind`` is ``"kendall"`` (``eta_n`` the joint ECDF, scalar class),
    ``"copula"`` (marginal ECDFs, class on the square) or ``"residual"``
    (polynomial fit of the given degree).  ``estimator="truth"`` replaces
    ``eta_n`` by ``eta_0``, a fixture for which ``S_n`` is identically 0.
    """
    ns = _check_n_list(n_list)
    if estimator not in ("ecdf", "truth"):
        raise DomainError("estimator must be 'ecdf' or 'truth'")
    means = _class_means(model, kind, cls)
    medians, ses, all_stats = [], [], []
    for n in ns:
        def one(rep, rng, n=n):
            return _negligibility_stat(model, kind, cls, draw(model, n, rng), means, estimator, degree)

        vals = np.array(replicate(one, int(reps), seed, f"negligibility:{kind}:n={n}", threads))
        medians.append(float(np.median(vals)))
        ses.append(_median_se(vals))
        all_stats.append(vals)
    verdict, trend = trend_to_zero(medians, ses, decay_ratio)
    trend["loglog_slope"] = loglog_slope(ns, medians)
    return VerificationReport(
        name="negligibility", grid_label="n", grid=ns, observed=medians, se=ses, trend=trend,
        tolerance={"decay_ratio": decay_ratio}, verdict=verdict, seed=seed,
        params={"model": model.to_dict(), "kind": kind, "class": cls.to_config(), "reps": int(reps),
                "estimator": estimator},
        details={"mean": [float(v.mean()) for v in all_stats], "max": [float(v.max()) for v in all_stats]})


# --------------------------------------------------------------------------- (3)

def _pseudo_pair(model: DataModel, kind: str, rows: np.ndarray, x: np.ndarray, estimator: str, degree: int):
    """Values of ``eta_n`` and ``eta_0`` at the oracle points ``x`` (index coordinates)."""
    from .empirical import JointECDF, MarginalECDF

    sample = Sample(rows)
    if kind == "kendall":
        eta_0 = copula_cdf(model, x)[:, None]
        eta_n = eta_0 if estimator == "truth" else JointECDF(sample)(x)[:, None]
    elif kind == "copula":
        eta_0 = x
        eta_n = eta_0 if estimator == "truth" else MarginalECDF(sample)(x)
    elif kind == "residual":
        eta_0 = (x[:, 1] - regression_truth(model, x[:, 0]))[:, None]
        if estimator == "truth":
            eta_n = eta_0
        else:
            fit = ls_polyfit(sample, degree)
            eta_n = (x[:, 1] - fit(x[:, 0]))[:, None]
    else:
        raise UnsupportedKindError(f"unknown process kind {kind!r}")
    return eta_n, eta_0


def check_l2_consistency(model: DataModel, cls: FunctionClass, n_list, reps: int, seed: int,
                         kind: str = "kendall", oracle_size: int = L2_ORACLE_DRAWS, estimator: str = "ecdf",
                         degree: int = 1, decay_ratio: float = NEGLIGIBILITY_DECAY,
                         threads: int | None = None) -> VerificationReport:
    """``E sup_theta P(f_{theta,eta_n} - f_{theta,eta_0})^2`` per ``n``.

    The inner ``P`` uses ``oracle_size`` fresh model draws per replication;
    the outer expectation averages ``reps`` independent estimators ``eta_n``.
    """
    ns = _check_n_list(n_list)
    means, ses, slopes_src = [], [], []
    for n in ns:
        def one(rep, rng, n=n):
            rows = draw(model, n, rng)
            x = draw(model, oracle_size, rng)
            eta_n, eta_0 = _pseudo_pair(model, kind, rows, x, estimator, degree)
            diff = cls.evaluate(eta_n) - cls.evaluate(eta_0)
            return float(np.max(np.mean(diff ** 2, axis=1)))

        vals = np.array(replicate(one, int(reps), seed, f"l2:{kind}:n={n}", threads))
        means.append(float(vals.mean()))
        ses.append(float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0)
        slopes_src.append(vals)
    verdict, trend = trend_to_zero(means, ses, decay_ratio)
    trend["loglog_slope"] = loglog_slope(ns, means)
    return VerificationReport(
        name="l2-consistency", grid_label="n", grid=ns, observed=means, se=ses, trend=trend,
        tolerance={"decay_ratio": decay_ratio}, verdict=verdict, seed=seed,
        params={"model": model.to_dict(), "kind": kind, "class": cls.to_config(), "reps": int(reps),
                "oracle_size": int(oracle_size), "estimator": estimator})


# --------------------------------------------------------------------------- (19)

def delta_sequence(rule) -> Callable[[int], float]:
    """``"n^-1/4"`` (default), ``"zero"``, a number (constant) or a callable of ``n``."""
    if callable(rule):
        return rule
    if rule in (None, "n^-1/4"):
        return lambda n: n ** -0.25
    if rule == "zero":
        return lambda n: 0.0
    if isinstance(rule, (int, float)):
        return lambda n: float(rule)
    raise DomainError(f"unknown delta rule {rule!r}")


def check_condition_19(model: DataModel, perturbations, n_list, t_grid=None, delta_rule="n^-1/4",
                       mc_size: int = HADAMARD_DRAWS, seed: int = 0,
                       decay_ratio: float = CONDITION_19_DECAY) -> VerificationReport:
    """``sup_{t, h_0} sqrt(n) P(eta_0 + h_0/sqrt(n) in (t, t + delta_n/sqrt(n)])`` per ``n``.

    All ``n`` share the same model draws (common random numbers), so the
    sequence reflects the shrinking window rather than resampling noise.
    """
    ns = _check_n_list(n_list)
    perturbations = list(perturbations)
    if not perturbations:
        raise DomainError("need at least one perturbation")
    t_grid = np.linspace(0.1, 0.9, 17) if t_grid is None else np.asarray(t_grid, dtype=float)
    delta = delta_sequence(delta_rule)
    x = draw(model, int(mc_size), rng_for(seed, "condition-19"))
    level = copula_cdf(model, x)
    hvals = [h(x) for h in perturbations]
    observed, ses, where = [], [], []
    for n in ns:
        rn = math.sqrt(n)
        best, best_se, best_at = -1.0, 0.0, None
        for k, hv in enumerate(hvals):
            z = np.sort(level + hv / rn)
            hi = np.searchsorted(z, t_grid + delta(n) / rn, side="right")
            lo = np.searchsorted(z, t_grid, side="right")
            p = (hi - lo) / z.shape[0]
            j = int(np.argmax(p))
            if rn * p[j] > best:
                best = rn * float(p[j])
                best_se = rn * math.sqrt(max(p[j] * (1 - p[j]), 0.0) / z.shape[0])
                best_at = (float(t_grid[j]), perturbations[k].label)
        observed.append(best)
        ses.append(best_se)
        where.append(best_at)
    verdict, trend = trend_to_zero(observed, ses, decay_ratio)
    return VerificationReport(
        name="condition-19", grid_label="n", grid=ns, observed=observed, se=ses, trend=trend,
        tolerance={"decay_ratio": decay_ratio}, verdict=verdict, seed=seed,
        params={"model": model.to_dict(), "mc_size": int(mc_size),
                "delta": [delta(n) for n in ns], "perturbations": [h.label for h in perturbations],
                "flagged": [h.label for h in perturbations if h.flagged]},
        details={"argmax": where})


# --------------------------------------------------------------------------- Lemma 3.2 / 3.3

def _as_seq(v) -> Callable[[float], object]:
    return v if callable(v) else (lambda t: v)


def _lemma_1d_run(x_sampler, y_rule, yt_rule, g, x, a, b, t, mc_size, seed):
    rng = rng_for(seed, "lemma-1d")
    total = total_sq = 0.0
    remaining = int(mc_size)
    xt, at, bt = _as_seq(x)(t), _as_seq(a)(t), _as_seq(b)(t)
    while remaining > 0:
        m = min(_CHUNK, remaining)
        xs = x_sampler(rng, m)
        y = y_rule(xs, rng)
        yt = y if yt_rule is None else yt_rule(xs, y, t)
        s = xs + t * at * yt
        v = np.asarray(g(yt), dtype=float) * ((s > xt) & (s <= xt + t * bt)) / t
        total += float(v.sum())
        total_sq += float((v * v).sum())
        remaining -= m
    n = int(mc_size)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n)


def _lemma_2d_run(x_sampler, y_rule, yt_rule, g, x, a, b, t, mc_size, seed):
    rng = rng_for(seed, "lemma-2d")
    total = total_sq = 0.0
    remaining = int(mc_size)
    xt = np.asarray(_as_seq(x)(t), dtype=float)
    at = float(_as_seq(a)(t))
    bt = np.asarray(_as_seq(b)(t), dtype=float)
    while remaining > 0:
        m = min(_CHUNK, remaining)
        xs = x_sampler(rng, m)
        y = y_rule(xs, rng)
        yt = y if yt_rule is None else yt_rule(xs, y, t)
        s = xs + t * at * yt
        inner = np.all(s <= xt + t * bt, axis=1) & ~np.all(s <= xt, axis=1)
        v = np.asarray(g(yt), dtype=float) * inner / t
        total += float(v.sum())
        total_sq += float((v * v).sum())
        remaining -= m
    n = int(mc_size)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return mean, math.sqrt(var / n)


def _lemma_report(name, runner, args, t_grid, target, mc_size, seed, rtol, yt_rule):
    t_grid = [float(t) for t in t_grid]
    if not t_grid or any(t <= 0 for t in t_grid):
        raise DomainError("t_grid must contain positive scales")
    t_grid = sorted(t_grid, reverse=True)
    est, se, est_t, se_t = [], [], [], []
    for t in t_grid:
        m, s = runner(*args[:2], None, *args[2:], t, mc_size, seed)
        est.append(m)
        se.append(s)
        if yt_rule is not None:
            m2, s2 = runner(*args[:2], yt_rule, *args[2:], t, mc_size, seed)
            est_t.append(m2)
            se_t.append(s2)
    target = float(target)
    tol = max(3.0 * se[-1], rtol * abs(target))
    ok = abs(est[-1] - target) <= tol
    trend = {"final_error": abs(est[-1] - target), "final_tolerance": tol}
    if yt_rule is not None:
        comb = math.sqrt(se[-1] ** 2 + se_t[-1] ** 2)
        agree = abs(est[-1] - est_t[-1]) <= 3.0 * comb
        trend.update({"perturbed_estimate": est_t[-1], "perturbed_difference": abs(est[-1] - est_t[-1]),
                      "perturbed_tolerance": 3.0 * comb, "perturbed_agrees": agree})
        ok = ok and agree
    return VerificationReport(
        name=name, grid_label="t", grid=t_grid, observed=est, se=se, trend=trend,
        tolerance={"rtol": rtol, "k_se": 3.0}, verdict=PASS if ok else FAIL, seed=seed,
        params={"target": target, "mc_size": int(mc_size)},
        details={"perturbed": est_t, "perturbed_se": se_t} if yt_rule is not None else {})


def check_lemma_limit_1d(x_sampler, y_rule, g, x, a, b, t_grid, target: float, yt_rule=None,
                         mc_size: int = LEMMA_DRAWS, seed: int = 0, rtol: float = 0.05) -> VerificationReport:
    """``(1/t) E g(Y_t) 1{x_t < X + t a_t Y_t <= x_t + t b_t}`` against the caller's limit ``target``.

    ``x_sampler(rng, m)`` draws ``X``; ``y_rule(X, rng)`` gives ``Y``;
    ``yt_rule(X, Y, t)`` gives ``Y_t`` (when supplied, a second run with
    ``Y_t`` is compared with the ``Y`` run).  ``x``, ``a`` and ``b`` are numbers
    or functions of ``t``.  Verdict at the smallest ``t``:
    ``|estimate - target| <= max(3 SE, rtol |target|)``.
    """
    return _lemma_report("lemma-limit-1d", _lemma_1d_run, (x_sampler, y_rule, g, x, a, b), t_grid, target,
                         mc_size, seed, rtol, yt_rule)


def check_lemma_limit_2d(x_sampler, y_rule, g, x, a, b, t_grid, target: float, yt_rule=None,
                         mc_size: int = LEMMA_DRAWS, seed: int = 0, rtol: float = 0.05) -> VerificationReport:
    """Two-dimensional analogue: ``(1/t) E g(Y_t)(1{X + t a Y_t <= x + t b} - 1{X + t a Y_t <= x})``."""
    return _lemma_report("lemma-limit-2d", _lemma_2d_run, (x_sampler, y_rule, g, x, a, b), t_grid, target,
                         mc_size, seed, rtol, yt_rule)


def lemma_2d_target(density, kernel_mean, x, b, lower=(0.0, 0.0)) -> float:
    """The two boundary integrals of the 2-d limit by 1-d quadrature.

    ``density(s1, s2)`` is the density of ``X``; ``kernel_mean(s1, s2)`` is
    ``int g(y) K((s1, s2), dy)``.  ``lower`` gives the lower ends of the two
    integrals (the support of ``X``).
    """
    x1, x2 = map(float, x)
    b1, b2 = map(float, b)
    first = integrate.quad(lambda s2: kernel_mean(x1, s2) * density(x1, s2), lower[1], x2, limit=200)[0]
    second = integrate.quad(lambda s1: kernel_mean(s1, x2) * density(s1, x2), lower[0], x1, limit=200)[0]
    return b1 * first + b2 * second


# --------------------------------------------------------------------------- Lemma 4.1 / 4.2

def check_hadamard_smooth(model: DataModel, cls: FunctionClass, h: PerturbationFunction, t_grid,
                          mc_size: int = HADAMARD_DRAWS, seed: int = 0, tol: float = 1e-2) -> VerificationReport:
    """``max_theta |(1/t) P(theta(eta_0 + t h) - theta(eta_0)) - P theta'(eta_0) h|`` along ``t``.

    A class of dimension 1 acts on the pseudo-level ``C(X)``; a class of the
    model's dimension acts on ``X`` itself, with ``h`` returning one column per
    coordinate.  All scales share the same draws.
    """
    if not cls.differentiable:
        raise UnsupportedKindError("check_hadamard_smooth needs differentiable members")
    t_grid = sorted((float(t) for t in t_grid), reverse=True)
    x = draw(model, int(mc_size), rng_for(seed, "hadamard-smooth"))
    base = copula_cdf(model, x)[:, None] if cls.dim == 1 else x
    hv = np.asarray(h(x), dtype=float)
    hv = hv.reshape(-1, 1) if hv.ndim == 1 else hv
    if hv.shape[1] != cls.dim:
        raise DomainError("perturbation dimension does not match the class")
    errors, ses = [], []
    for t in t_grid:
        worst, worst_se = -1.0, 0.0
        for m in cls.members:
            deriv = np.sum(m.grad(base) * hv, axis=1)
            v = (m(base + t * hv) - m(base)) / t - deriv
            err = abs(float(v.mean()))
            if err > worst:
                worst, worst_se = err, float(v.std(ddof=1) / math.sqrt(v.shape[0]))
        errors.append(worst)
        ses.append(worst_se)
    decreasing = decreasing_within_noise(errors, ses, 3.0, floor=1e-12)
    final_ok = errors[-1] <= max(3.0 * ses[-1], tol)
    return VerificationReport(
        name="hadamard-smooth", grid_label="t", grid=t_grid, observed=errors, se=ses,
        trend={"decreasing": decreasing, "final_within_tolerance": final_ok,
               "loglog_slope": loglog_slope(t_grid, errors)},
        tolerance={"tol": tol, "k_se": 3.0}, verdict=PASS if decreasing and final_ok else FAIL, seed=seed,
        params={"model": model.to_dict(), "class": cls.to_config(), "perturbation": h.label,
                "mc_size": int(mc_size), "flagged": h.flagged})


def check_hadamard_bv(model: DataModel, s_grid, h0: PerturbationFunction, t_grid,
                      mc_size: int = HADAMARD_DRAWS, seed: int = 0, rtol: float = 0.05,
                      band_draws: int | None = None) -> VerificationReport:
    """``(1/t) P(1{s <= eta_0 + t h_0} - 1{s <= eta_0})`` against ``E(h_0(X) | eta_0(X) = s) k(s)``.

    The conditional mean comes from the band-conditioning oracle and ``k`` from
    the Kendall density.  Observed values are the worst absolute errors over
    ``s_grid``; the verdict requires errors that do not grow beyond noise and
    a final error within ``max(3 SE, rtol |target|)`` at every ``s``.
    """
    from .models import BAND_DRAWS

    s_grid = np.asarray(s_grid, dtype=float).reshape(-1)
    t_grid = sorted((float(t) for t in t_grid), reverse=True)
    x = draw(model, int(mc_size), rng_for(seed, "hadamard-bv"))
    level = copula_cdf(model, x)
    hv = np.asarray(h0(x), dtype=float).reshape(-1)
    targets, target_se = [], []
    for s in s_grid:
        cm, cse = conditional_expectation(model, h0, float(s), n_draws=band_draws or BAND_DRAWS,
                                          seed=derive_seed(seed, "band", float(s)))
        k = kendall_density(model, float(s))
        targets.append(cm * k)
        target_se.append(cse * k if math.isfinite(cse) else 0.0)
    targets = np.array(targets)
    target_se = np.array(target_se)
    errors, ses, per_t = [], [], []
    final_ok = True
    for idx, t in enumerate(t_grid):
        shifted = level + t * hv
        diffs = (shifted[:, None] >= s_grid).astype(float) - (level[:, None] >= s_grid)
        q = diffs.mean(axis=0) / t
        qse = diffs.std(axis=0, ddof=1) / math.sqrt(diffs.shape[0]) / t
        comb = np.sqrt(qse ** 2 + target_se ** 2)
        err = np.abs(q - targets)
        j = int(np.argmax(err))
        errors.append(float(err[j]))
        ses.append(float(comb[j]))
        per_t.append({"t": t, "quotient": q.tolist(), "se": qse.tolist()})
        if idx == len(t_grid) - 1:
            final_ok = bool(np.all(err <= np.maximum(3.0 * comb, rtol * np.abs(targets))))
    decreasing = decreasing_within_noise(errors, ses, 3.0, floor=1e-12)
    return VerificationReport(
        name="hadamard-bv", grid_label="t", grid=t_grid, observed=errors, se=ses,
        trend={"decreasing": decreasing, "final_within_tolerance": final_ok},
        tolerance={"rtol": rtol, "k_se": 3.0}, verdict=PASS if decreasing and final_ok else FAIL, seed=seed,
        params={"model": model.to_dict(), "s_grid": s_grid.tolist(), "perturbation": h0.label,
                "mc_size": int(mc_size), "flagged": h0.flagged},
        details={"targets": targets.tolist(), "target_se": target_se.tolist(), "per_t": per_t})


# --------------------------------------------------------------------------- covariance / normality

_LIMIT_KIND = {"kendall": "kendall-indicator", "copula": "copula-indicator",
               "smooth-kendall": "kendall-smooth", "smooth-copula": "copula-smooth"}


def compare_covariance(model: DataModel, kind: str, grid, n: int, reps: int, seed: int,
                       limit_mc: int = 10**6, cls: FunctionClass | None = None, paths=None,
                       k_se: float = 4.0, min_fraction: float = 0.9, influence_options: dict | None = None,
                       threads: int | None = None) -> VerificationReport:
    """Empirical covariance of ``reps`` process paths against the influence-function limit covariance.

    Only the unique (upper-triangle) entries are compared.  ``paths`` may
    carry precomputed replications (a ``(reps, m)`` array or ProcessPaths).
    """
    if kind not in _LIMIT_KIND:
        raise UnsupportedKindError(f"no limit covariance for process kind {kind!r}")
    if paths is None:
        paths = replicate_process(model, kind, n, reps, seed, grid, cls=cls, threads=threads)
    elif len(paths) and isinstance(paths[0], ProcessPath):
        paths = np.vstack([p.values for p in paths])
    paths = np.asarray(paths, dtype=float)
    emp, emp_se, _ = covariance_with_se(paths.T)
    family = influence_family(model, _LIMIT_KIND[kind], grid, cls=cls, **(influence_options or {}))
    lim: CovarianceEstimate = limit_covariance(family, limit_mc, derive_seed(seed, "limit"), model)
    iu = np.triu_indices(emp.shape[0])
    diff = np.abs(emp - lim.matrix)[iu]
    comb = np.sqrt(emp_se ** 2 + lim.se ** 2)[iu]
    within = diff <= k_se * comb
    frac = float(within.mean())
    return VerificationReport(
        name="covariance", grid_label="entry", grid=list(range(len(diff))), observed=diff.tolist(),
        se=comb.tolist(), trend={"fraction_within": frac, "entries": int(len(diff))},
        tolerance={"k_se": k_se, "min_fraction": min_fraction},
        verdict=PASS if frac >= min_fraction else FAIL, seed=seed,
        params={"model": model.to_dict(), "kind": kind, "n": int(n), "reps": int(paths.shape[0]),
                "limit_mc": int(limit_mc)},
        details={"empirical": emp, "empirical_se": emp_se, "limit": lim.matrix, "limit_se": lim.se,
                 "entry_index": [list(map(int, p)) for p in zip(*iu)]})


def check_normality(paths, index: int = 0, alpha: float = 0.01, name: str = "normality",
                    lattice_step: float | None = None, seed: int = 0) -> VerificationReport:
    """KS distance of standardized replication values at one grid point to the standard normal.

    Values of lattice-valued processes (the Kendall process lives on the grid
    ``k / sqrt(n)``) have atoms that inflate the KS distance against any
    continuous law.  With ``lattice_step`` each value is spread uniformly over
    its lattice cell first (a randomized continuity correction whose size
    vanishes with ``n``).
    """
    if len(paths) and isinstance(paths[0], ProcessPath):
        vals = np.array([p.values[index] for p in paths], dtype=float)
    else:
        vals = np.asarray(paths, dtype=float)
        vals = vals[:, index] if vals.ndim == 2 else vals
    sd = float(vals.std(ddof=1)) if vals.shape[0] > 1 else 0.0
    if not sd > 0:
        return VerificationReport(
            name=name, grid_label="index", grid=[index], observed=[float("nan")], se=[float("nan")],
            trend={"degenerate": True}, tolerance={"alpha": alpha}, verdict=FAIL, seed=None,
            params={"reps": int(vals.shape[0])})
    if lattice_step:
        vals = vals + float(lattice_step) * (rng_for(seed, "normality-jitter").random(vals.shape[0]) - 0.5)
        sd = float(vals.std(ddof=1))
    z = (vals - vals.mean()) / sd
    res = stats.kstest(z, "norm")
    verdict = PASS if res.pvalue >= alpha else FAIL
    return VerificationReport(
        name=name, grid_label="index", grid=[index], observed=[float(res.statistic)],
        se=[float(1.0 / math.sqrt(vals.shape[0]))],
        trend={"pvalue": float(res.pvalue), "critical_value": float(stats.kstwo.ppf(1 - alpha, vals.shape[0]))},
        tolerance={"alpha": alpha}, verdict=verdict, seed=seed if lattice_step else None,
        params={"reps": int(vals.shape[0]), "mean": float(vals.mean()), "sd": sd,
                "lattice_step": lattice_step})


CHECKS = {
    "negligibility": check_negligibility,
    "l2-consistency": check_l2_consistency,
    "condition-19": check_condition_19,
    "lemma-limit-1d": check_lemma_limit_1d,
    "lemma-limit-2d": check_lemma_limit_2d,
    "hadamard-smooth": check_hadamard_smooth,
    "hadamard-bv": check_hadamard_bv,
    "covariance": compare_covariance,
    "normality": check_normality,
}

__all__ = [name for name in dir() if name.startswith("check_")] + [
    "PerturbationFunction", "compare_covariance", "CHECKS", "INCONCLUSIVE", "lemma_2d_target"]
