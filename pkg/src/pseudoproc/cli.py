"""Experiment orchestration: config parsing, CSV ingestion, seeded runs and result files.

Usage::

    pseudoproc run config.json [--output DIR]
    pseudoproc ingest data.csv --dim 2 [--peek]
    pseudoproc list-checks
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import fclasses as fc
from . import processes as pr
from . import verify as vf
from .errors import ConfigError, IngestError, ModelRequiredError, PseudoprocError
from .models import DataModel, Sample, copula_cdf, draw
from .report import PASS, VerificationReport, jsonable
from .seeding import derive_seed, rng_for

PROCESS_EXPERIMENTS = ("kendall", "copula", "residual", "smooth")
CHECK_NAMES = ("negligibility", "l2-consistency", "condition-19", "hadamard-smooth", "hadamard-bv",
               "covariance", "normality", "lindeberg", "lemma-limit-1d", "lemma-limit-2d")
EXPERIMENTS = PROCESS_EXPERIMENTS + tuple(f"verify:{c}" for c in CHECK_NAMES) + ("entropy",)

TOP_KEYS = {"experiment", "model", "data", "class", "grid", "n_list", "reps", "seed", "tolerance",
            "output", "process", "degree", "options"}
MODEL_KEYS = {"independence": {"kind", "d"}, "clayton": {"kind", "d", "alpha"},
              "regression": {"kind", "d", "coeffs", "noise_sd"}}
TOLERANCE_KEYS = {"decay_ratio", "rtol", "k_se", "min_fraction", "alpha", "tol"}
OPTION_KEYS = {
    "kendall": set(), "copula": set(), "residual": set(), "smooth": set(),
    "verify:negligibility": {"estimator"},
    "verify:l2-consistency": {"estimator", "oracle_size"},
    "verify:condition-19": {"perturbations", "delta_rule", "mc_size"},
    "verify:hadamard-smooth": {"perturbation", "t_grid", "mc_size"},
    "verify:hadamard-bv": {"perturbation", "t_grid", "mc_size", "band_draws"},
    "verify:covariance": {"limit_mc"},
    "verify:normality": {"index", "jitter"},
    "verify:lindeberg": {"envelope", "eps", "mc_size", "delta"},
    "verify:lemma-limit-1d": {"y", "g", "x", "a", "b", "t_grid", "mc_size", "perturbed"},
    "verify:lemma-limit-2d": {"y", "g", "x", "a", "b", "t_grid", "mc_size", "perturbed"},
    "entropy": {"eps_grid", "delta_grid", "measure_count", "measure_size"},
}
NEEDS_MODEL = {f"verify:{c}" for c in CHECK_NAMES if not c.startswith("lemma")}


# --------------------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    n_list: list
    reps: int
    model: dict | None = None
    data: str | None = None
    cls: dict | None = None
    grid: list | None = None
    process: str = "kendall"
    degree: int = 1
    tolerance: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    output: str = "results"

    def to_dict(self) -> dict:
        out = {"experiment": self.experiment, "seed": self.seed, "n_list": self.n_list, "reps": self.reps,
               "model": self.model, "data": self.data, "class": self.cls, "grid": self.grid,
               "process": self.process, "degree": self.degree, "tolerance": self.tolerance,
               "options": self.options, "output": self.output}
        return jsonable(out)

    def digest(self) -> str:
        body = {k: v for k, v in self.to_dict().items() if k != "output"}
        return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()

    def build_model(self) -> DataModel | None:
        if self.model is None:
            return None
        kind = self.model["kind"]
        if kind == "independence":
            return DataModel.independence(int(self.model.get("d", 2)))
        if kind == "clayton":
            return DataModel.clayton(float(self.model["alpha"]))
        return DataModel.regression(self.model["coeffs"], float(self.model.get("noise_sd", 1.0)))


def _reject_unknown(block: dict, allowed: set, where: str):
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def _int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key!r} must be an integer")
    return value


def parse_config(text: str) -> ExperimentConfig:
    """Validate a JSON experiment config and fill defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _reject_unknown(raw, TOP_KEYS, "config")
    exp = raw.get("experiment", "kendall")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r} in key 'experiment'")
    if "seed" not in raw:
        raise ConfigError("missing required key 'seed'")
    seed = _int(raw["seed"], "seed")
    n_list = raw.get("n_list", [100])
    if not isinstance(n_list, list) or not n_list:
        raise ConfigError("'n_list' must be a nonempty list")
    n_list = [_int(n, "n_list") for n in n_list]
    if any(n < 1 for n in n_list):
        raise ConfigError("'n_list' entries must be >= 1")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigError("n_list not increasing")
    reps = _int(raw.get("reps", 1), "reps")
    if reps < 1:
        raise ConfigError("'reps' must be >= 1")

    model = raw.get("model")
    data = raw.get("data")
    if model is None and data is None:
        raise ConfigError("config needs a 'model' block or a 'data' path")
    if model is not None:
        if not isinstance(model, dict) or model.get("kind") not in MODEL_KEYS:
            raise ConfigError("'model.kind' must be one of independence, clayton, regression")
        _reject_unknown(model, MODEL_KEYS[model["kind"]], "model")
        model = dict(model)
        model.setdefault("d", 2)
        if model["kind"] == "clayton" and "alpha" not in model:
            raise ConfigError("missing key 'model.alpha'")
        if model["kind"] == "regression":
            if "coeffs" not in model:
                raise ConfigError("missing key 'model.coeffs'")
            model.setdefault("noise_sd", 1.0)
    if exp in NEEDS_MODEL and model is None:
        raise ModelRequiredError(f"model required for {exp}")

    tolerance = raw.get("tolerance", {})
    if not isinstance(tolerance, dict):
        raise ConfigError("'tolerance' must be an object")
    _reject_unknown(tolerance, TOLERANCE_KEYS, "tolerance")
    options = raw.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("'options' must be an object")
    _reject_unknown(options, OPTION_KEYS[exp], "options")

    process = raw.get("process", "residual" if model and model["kind"] == "regression" else "kendall")
    if exp in PROCESS_EXPERIMENTS[:3]:
        process = exp
    if process not in ("kendall", "copula", "residual"):
        raise ConfigError(f"unknown process {process!r} in key 'process'")
    degree = _int(raw.get("degree", 1), "degree")

    cfg = ExperimentConfig(experiment=exp, seed=seed, n_list=n_list, reps=reps, model=model, data=data,
                           cls=raw.get("class"), grid=raw.get("grid"), process=process, degree=degree,
                           tolerance=dict(tolerance), options=dict(options), output=raw.get("output", "results"))
    _fill_defaults(cfg)
    # building validates kinds and parameters early
    try:
        cfg.build_model()
        if cfg.cls is not None:
            fc.class_from_config(cfg.cls)
    except PseudoprocError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _default_grid(cfg: ExperimentConfig) -> list:
    d = int(cfg.model.get("d", 2)) if cfg.model else 2
    if cfg.experiment == "verify:covariance" or cfg.experiment == "verify:normality":
        if cfg.process == "kendall":
            return [0.3, 0.5, 0.7]
        if cfg.process == "copula":
            return pr.interior_grid(3, d).tolist()
    if cfg.experiment == "verify:hadamard-bv":
        return [0.3, 0.5, 0.7]
    if cfg.process == "copula":
        return pr.interior_grid(dim=d).tolist()
    if cfg.process == "residual":
        sd = float(cfg.model.get("noise_sd", 1.0)) if cfg.model else 1.0
        return (np.linspace(-2.0, 2.0, 17) * max(sd, 1e-3)).tolist()
    return pr.default_theta_grid().tolist()


def _fill_defaults(cfg: ExperimentConfig):
    if cfg.grid is None and cfg.experiment not in ("smooth", "verify:lindeberg", "entropy",
                                                   "verify:lemma-limit-1d", "verify:lemma-limit-2d"):
        cfg.grid = _default_grid(cfg)
    if cfg.cls is None and cfg.experiment in ("smooth", "verify:hadamard-smooth"):
        dim = int(cfg.model.get("d", 2)) if cfg.process == "copula" and cfg.model else 1
        cfg.cls = {"kind": "lipschitz", "seed": cfg.seed, "count": 5, "dim": dim, "terms": 3}
    if cfg.cls is None and cfg.experiment in ("verify:negligibility", "verify:l2-consistency", "entropy"):
        cfg.cls = {"kind": "indicator-grid", "grid": cfg.grid if cfg.grid is not None else
                   pr.default_theta_grid().tolist()}
    o = cfg.options
    if cfg.experiment == "verify:condition-19":
        o.setdefault("perturbations", ["zero", "bridge:1", "eta0"])
        o.setdefault("delta_rule", "n^-1/4")
        o.setdefault("mc_size", vf.HADAMARD_DRAWS)
    if cfg.experiment in ("verify:hadamard-smooth", "verify:hadamard-bv"):
        o.setdefault("perturbation", "bridge:1" if cfg.experiment.endswith("smooth") else "constant:1")
        o.setdefault("t_grid", [0.1, 0.01, 0.001])
        o.setdefault("mc_size", vf.HADAMARD_DRAWS)
    if cfg.experiment == "verify:covariance":
        o.setdefault("limit_mc", 10**6)
    if cfg.experiment == "verify:normality":
        o.setdefault("index", 0)
        o.setdefault("jitter", True)
    if cfg.experiment == "verify:lindeberg":
        o.setdefault("envelope", "composition")
        o.setdefault("eps", 0.1)
        o.setdefault("mc_size", 100_000)
        o.setdefault("delta", 1.0)
    if cfg.experiment.startswith("verify:lemma"):
        two = cfg.experiment.endswith("2d")
        o.setdefault("y", [0.0, 0.0] if two else 2.0)
        o.setdefault("g", "one" if two else "identity")
        o.setdefault("x", [0.5, 0.5] if two else 0.5)
        o.setdefault("a", 1.0)
        o.setdefault("b", [1.0, 1.0] if two else 1.0)
        o.setdefault("t_grid", [0.1, 0.01, 0.001])
        o.setdefault("mc_size", 10**6)
        o.setdefault("perturbed", True)
    if cfg.experiment == "entropy":
        o.setdefault("eps_grid", [0.5, 0.25, 0.125, 0.0625])
        o.setdefault("delta_grid", [0.25, 0.5, 1.0])
        o.setdefault("measure_count", 4)
        o.setdefault("measure_size", 200)


# --------------------------------------------------------------------------- ingest

def ingest_csv(path, dimension: int) -> Sample:
    """Read a comma-separated UTF-8 file with a header and ``dimension`` numeric columns.

    Blank lines are skipped; non-numeric cells are reported with their line
    number.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    rows, header = [], None
    for lineno, record in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not record or all(not cell.strip() for cell in record):
            continue
        if header is None:
            header = record
            if _all_numeric(record):
                raise IngestError(f"{path}:{lineno}: expected a header line, found numbers")
            if len(header) != dimension:
                raise IngestError(f"{path}:{lineno}: header has {len(header)} columns, expected {dimension}")
            continue
        if len(record) != dimension:
            raise IngestError(f"{path}:{lineno}: dimension mismatch ({len(record)} columns, expected {dimension})")
        try:
            rows.append([float(cell) for cell in record])
        except ValueError:
            bad = next(c for c in record if not _is_number(c))
            raise IngestError(f"{path}:{lineno}: non-numeric cell {bad!r}") from None
    if not rows:
        raise IngestError(f"{path}: empty file (no data rows)")
    return Sample(np.array(rows), provenance=str(path))


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _all_numeric(record) -> bool:
    return all(_is_number(c) for c in record)


# --------------------------------------------------------------------------- writing

def _fmt(x) -> str:
    x = float(x)
    return repr(x) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([c if isinstance(c, (int, np.integer)) else _fmt(c) for c in r])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


class _Writer:
    """Collects result files in memory; written once at the end."""

    def __init__(self):
        self.files: dict[str, str] = {}
        self.reports: list[VerificationReport] = []

    def add(self, name: str, text: str):
        self.files[name] = text

    def report(self, stem: str, rep: VerificationReport):
        self.reports.append(rep)
        self.add(f"{stem}.json", _json_text(rep.to_dict()))
        header, rows = rep.csv_rows()
        self.add(f"{stem}.csv", _csv_text(header, rows))

    def paths(self, stem: str, grid, values: np.ndarray, meta: dict):
        g = np.asarray(grid, dtype=float)
        g2 = g[:, None] if g.ndim == 1 else g
        cols = ["index"] if g.ndim == 1 else [f"index_{j + 1}" for j in range(g2.shape[1])]
        rows = []
        for r, vals in enumerate(np.atleast_2d(values)):
            for i, (gi, v) in enumerate(zip(g2, vals)):
                rows.append([r, i, *gi, v])
        self.add(f"{stem}.csv", _csv_text(["rep", "grid_id", *cols, "value"], rows))
        self.add(f"{stem}.json", _json_text({**meta, "grid": g, "mean": np.mean(values, axis=0),
                                              "var": np.var(values, axis=0)}))


# --------------------------------------------------------------------------- dispatch

def _perturbation(spec: str, model: DataModel) -> vf.PerturbationFunction:
    name, _, arg = spec.partition(":")
    if name == "zero":
        return vf.zero_perturbation()
    if name == "constant":
        return vf.constant_perturbation(float(arg or 1.0))
    if name == "bridge":
        return vf.bridge_perturbation(model, float(arg or 1.0))
    if name == "eta0":
        return vf.level_perturbation(model)
    raise ConfigError(f"unknown perturbation {spec!r}")


def _tol(cfg: ExperimentConfig, *keys) -> dict:
    return {k: cfg.tolerance[k] for k in keys if k in cfg.tolerance}


def _process_kind(cfg: ExperimentConfig) -> str:
    if cfg.experiment == "smooth":
        return "smooth-copula" if cfg.process == "copula" else "smooth-kendall"
    return cfg.process


def _run_process(cfg: ExperimentConfig, model: DataModel | None, sample: Sample | None, out: _Writer):
    if model is None:
        if cfg.experiment not in ("kendall", "copula"):
            raise ModelRequiredError(f"model required for {cfg.experiment} on ingested data")
        path = (pr.kendall_empirical(sample, cfg.grid) if cfg.experiment == "kendall"
                else pr.copula_empirical(sample, cfg.grid))
        out.paths("empirical", path.grid, path.values[None, :],
                  {"kind": path.kind, "n": sample.n, "provenance": sample.provenance})
        return
    cls = fc.class_from_config(cfg.cls) if cfg.experiment == "smooth" else None
    kind = _process_kind(cfg)
    for n in cfg.n_list:
        vals = pr.replicate_process(model, kind, n, cfg.reps, cfg.seed, cfg.grid, cls=cls, degree=cfg.degree)
        grid = cfg.grid if cls is None else list(range(len(cls)))
        out.paths(f"paths_n{n}", grid, vals, {"kind": kind, "n": n, "reps": cfg.reps,
                                              "model": model.to_dict(), "seed": cfg.seed})


def _lemma(cfg: ExperimentConfig) -> VerificationReport:
    o = cfg.options
    two = cfg.experiment.endswith("2d")
    y = np.asarray(o["y"], dtype=float)
    gname = o["g"]
    gfun = {"one": lambda v: np.ones(v.shape[0]),
            "identity": lambda v: v if v.ndim == 1 else v[:, 0],
            "product": lambda v: v if v.ndim == 1 else np.prod(v, axis=1)}.get(gname)
    if gfun is None:
        raise ConfigError(f"unknown g {gname!r} in options")
    yt = (lambda x, yy, t: yy + t) if o["perturbed"] else None
    if two:
        def sampler(rng, m):
            return rng.random((m, 2))

        def yrule(x, rng):
            return np.broadcast_to(y, x.shape).copy()
        gy = float(gfun(y[None, :])[0])
        target = vf.lemma_2d_target(lambda s1, s2: 1.0, lambda s1, s2: gy, o["x"], o["b"])
        return vf.check_lemma_limit_2d(sampler, yrule, gfun, tuple(o["x"]), o["a"], tuple(o["b"]), o["t_grid"],
                                       target, yt, o["mc_size"], cfg.seed, **_tol(cfg, "rtol"))

    def sampler1(rng, m):
        return rng.random(m)

    def yrule1(x, rng):
        return np.full(x.shape, float(y))
    x0 = float(o["x"])
    target = float(o["b"]) * float(gfun(np.array([float(y)]))[0]) * (1.0 if 0.0 < x0 < 1.0 else 0.0)
    return vf.check_lemma_limit_1d(sampler1, yrule1, gfun, x0, o["a"], o["b"], o["t_grid"], target, yt,
                                   o["mc_size"], cfg.seed, **_tol(cfg, "rtol"))


def _lindeberg(cfg: ExperimentConfig, model: DataModel) -> VerificationReport:
    o = cfg.options
    name, _, arg = str(o["envelope"]).partition(":")
    if name == "constant":
        env = lambda n: fc.constant_envelope(float(arg or 1.0))  # noqa: E731
    elif name == "composition":
        env = lambda n: fc.composition_envelope(lambda y: np.ones(y.shape[0]), n, model.dim)  # noqa: E731
    elif name == "lipschitz":
        env = lambda n: fc.lipschitz_envelope(float(arg or o["delta"]), n)  # noqa: E731
    else:
        raise ConfigError(f"unknown envelope {o['envelope']!r}")

    def sampler(rng, m):
        if name == "composition":
            return np.hstack([draw(model, m, rng), rng.standard_normal((m, model.dim))])
        return draw(model, m, rng)
    return fc.lindeberg_check(env, sampler, cfg.n_list, float(o["eps"]), int(o["mc_size"]), cfg.seed)


def _entropy(cfg: ExperimentConfig, model: DataModel | None, sample: Sample | None, out: _Writer):
    cls = fc.class_from_config(cfg.cls)
    o = cfg.options
    measures = []
    for k in range(int(o["measure_count"])):
        if model is not None:
            rows = draw(model, int(o["measure_size"]), rng_for(cfg.seed, "entropy-measure", k))
            pts = copula_cdf(model, rows)[:, None] if cls.dim == 1 and model.is_copula else rows[:, :cls.dim]
        else:
            pts = sample.rows[:, :cls.dim]
        measures.append(fc.empirical_measure(pts, f"empirical-{k}"))
    measures += fc.stress_measures(cls.dim, cfg.seed)
    rows = []
    for eps in o["eps_grid"]:
        counts = [fc.covering_number(cls, float(eps) * max(fc.envelope_norm(cls, q), 1e-300), q)
                  for q in measures if fc.envelope_norm(cls, q) > 0]
        rows.append([float(eps), max(counts)])
    out.add("covering.csv", _csv_text(["eps", "covering_number"], rows))
    ints = [[float(d), fc.uniform_entropy_integral(cls, float(d), measures)] for d in o["delta_grid"]]
    out.add("entropy_integral.csv", _csv_text(["delta", "J"], ints))
    summary = {"class": cls.to_config(), "measures": [q.label for q in measures],
               "covering": rows, "entropy_integral": ints, "lower_bound_of_sup_over_Q": True}
    if cls.kind == "indicator-grid" and cls.dim == 1 and model is not None and model.is_copula:
        grid = [m.threshold[0] for m in cls.members]
        summary["bracketing"] = [[float(e), fc.bracketing_number_indicators(float(e), model, grid)]
                                 for e in o["eps_grid"]]
    out.add("entropy.json", _json_text(summary))


def _run_check(cfg: ExperimentConfig, model: DataModel, out: _Writer):
    check = cfg.experiment.split(":", 1)[1]
    o = cfg.options
    if check in ("negligibility", "l2-consistency"):
        cls = fc.class_from_config(cfg.cls)
        fn = vf.check_negligibility if check == "negligibility" else vf.check_l2_consistency
        kw = dict(_tol(cfg, "decay_ratio"), estimator=o.get("estimator", "ecdf"), degree=cfg.degree)
        if check == "negligibility":
            rep = fn(model, cfg.process, cls, cfg.n_list, cfg.reps, cfg.seed, **kw)
        else:
            kw["oracle_size"] = int(o.get("oracle_size", vf.L2_ORACLE_DRAWS))
            rep = fn(model, cls, cfg.n_list, cfg.reps, cfg.seed, kind=cfg.process, **kw)
        out.report(check, rep)
    elif check == "condition-19":
        hs = [_perturbation(s, model) for s in o["perturbations"]]
        rep = vf.check_condition_19(model, hs, cfg.n_list, cfg.grid, o["delta_rule"], int(o["mc_size"]),
                                    cfg.seed, **_tol(cfg, "decay_ratio"))
        out.report(check, rep)
    elif check == "hadamard-smooth":
        cls = fc.class_from_config(cfg.cls)
        rep = vf.check_hadamard_smooth(model, cls, _perturbation(o["perturbation"], model), o["t_grid"],
                                       int(o["mc_size"]), cfg.seed, **_tol(cfg, "tol"))
        out.report(check, rep)
    elif check == "hadamard-bv":
        kw = _tol(cfg, "rtol")
        if "band_draws" in o:
            kw["band_draws"] = int(o["band_draws"])
        rep = vf.check_hadamard_bv(model, cfg.grid, _perturbation(o["perturbation"], model), o["t_grid"],
                                   int(o["mc_size"]), cfg.seed, **kw)
        out.report(check, rep)
    elif check in ("covariance", "normality"):
        for n in cfg.n_list:
            paths = pr.replicate_process(model, cfg.process, n, cfg.reps, cfg.seed, cfg.grid, degree=cfg.degree)
            if check == "covariance":
                rep = vf.compare_covariance(model, cfg.process, cfg.grid, n, cfg.reps, cfg.seed,
                                            int(o["limit_mc"]), paths=paths, **_tol(cfg, "k_se", "min_fraction"))
            else:
                step = 1.0 / math.sqrt(n) if o["jitter"] else None
                rep = vf.check_normality(paths, int(o["index"]), lattice_step=step,
                                         seed=derive_seed(cfg.seed, "normality", n), **_tol(cfg, "alpha"))
            out.report(f"{check}_n{n}", rep)
    elif check == "lindeberg":
        out.report(check, _lindeberg(cfg, model))
    else:
        out.report(check, _lemma(cfg))


@dataclass
class RunManifest:
    config_hash: str
    version: str
    files: dict
    verdicts: dict
    wall_time: float
    exit_status: int

    def to_dict(self) -> dict:
        return jsonable(self.__dict__)


def run(cfg: ExperimentConfig, output: str | Path | None = None) -> RunManifest:
    """Execute an experiment and write its result files plus ``manifest.json``."""
    start = time.perf_counter()
    outdir = Path(output or cfg.output)
    model = cfg.build_model()
    sample = None
    if cfg.data is not None:
        d = int(cfg.model.get("d", 2)) if cfg.model else _data_dim(cfg.data)
        sample = ingest_csv(cfg.data, d)
    if model is None and cfg.experiment in NEEDS_MODEL:
        raise ModelRequiredError(f"model required for {cfg.experiment}")
    out = _Writer()
    if cfg.experiment in PROCESS_EXPERIMENTS:
        _run_process(cfg, model, sample, out)
    elif cfg.experiment == "entropy":
        _entropy(cfg, model, sample, out)
    else:
        _run_check(cfg, model, out)
    out.add("config.json", _json_text(cfg.to_dict()))

    outdir.mkdir(parents=True, exist_ok=True)
    hashes = {}
    for name in sorted(out.files):
        (outdir / name).write_text(out.files[name], encoding="utf-8")
        hashes[name] = hashlib.sha256(out.files[name].encode()).hexdigest()
    verdicts = {r.name + (f"[{i}]" if i else ""): r.verdict for i, r in enumerate(out.reports)}
    status = 0 if all(r.verdict == PASS for r in out.reports) else 1
    manifest = RunManifest(cfg.digest(), __version__, hashes, verdicts,
                           round(time.perf_counter() - start, 3), status)
    (outdir / "manifest.json").write_text(_json_text(manifest.to_dict()), encoding="utf-8")
    return manifest


def _data_dim(path) -> int:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                return len(next(csv.reader([line])))
    raise IngestError(f"{path}: empty file")


# --------------------------------------------------------------------------- entry point

def _error_json(exc: BaseException) -> str:
    return json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pseudoproc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="path to a JSON config")
    p_run.add_argument("--output", help="output directory (overrides the config)")
    p_ing = sub.add_parser("ingest", help="validate a CSV data file")
    p_ing.add_argument("file")
    p_ing.add_argument("--dim", type=int, required=True)
    p_ing.add_argument("--peek", action="store_true", help="print the first rows")
    sub.add_parser("list-checks", help="list available verification checks")
    args = parser.parse_args(argv)

    if args.command == "list-checks":
        for name in CHECK_NAMES:
            print(name)
        return 0
    try:
        if args.command == "ingest":
            s = ingest_csv(args.file, args.dim)
            info = {"n": s.n, "d": s.dim, "provenance": s.provenance}
            if args.peek:
                info["head"] = s.rows[:5].tolist()
            print(json.dumps(info, sort_keys=True))
            return 0
        text = Path(args.config).read_text(encoding="utf-8")
        cfg = parse_config(text)
        manifest = run(cfg, args.output)
        print(json.dumps({"verdicts": manifest.verdicts, "exit_status": manifest.exit_status,
                          "output": str(args.output or cfg.output)}, sort_keys=True))
        return manifest.exit_status
    except (PseudoprocError, OSError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
