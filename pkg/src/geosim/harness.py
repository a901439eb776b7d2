"""Experiment matrix: relationships x methods, with tables and plot data."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .baselines import gaussian_copula_sim, lu_joint_sim
from .errors import ParameterError, UndefinedMetricError
from .fieldgen import Field, Relationship, RelationshipKind, generate_pair
from .grid import Grid2D
from .metrics import MetricReport, joint_shape_similarity, variogram_correlation
from .rng import Rng
from .transport import SinkhornParams, mst_direct_detailed
from .variogram import VariogramKind, VariogramModel, empirical_variogram, evaluate

log = logging.getLogger(__name__)

METHODS = ("mst", "copula", "lu")
METRICS = ("shape", "variogram_x", "variogram_y")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    nx: int = 25
    ny: int = 25
    spacing: float = 1.0
    seed: int = 42
    model_x: VariogramModel = VariogramModel.spherical(1.0, 12.0)
    model_y: VariogramModel = VariogramModel.exponential(1.0, 6.0)
    sinkhorn: SinkhornParams = SinkhornParams()
    n_lags: int = 15
    max_lag_factor: float = 1.5
    hist_bins: int = 20
    noise_scale: float = 0.1
    rho_space: str = "scores"
    relationships: tuple[Relationship, ...] = tuple(Relationship)
    methods: tuple[str, ...] = METHODS

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods listed more than once")
        if self.rho_space not in ("scores", "raw"):
            raise ConfigError(f"rho_space must be 'scores' or 'raw', got {self.rho_space!r}")
        if self.n_lags < 2 or self.hist_bins < 1 or not self.max_lag_factor > 0:
            raise ConfigError("n_lags >= 2, hist_bins >= 1 and max_lag_factor > 0 required")
        if not self.noise_scale >= 0:
            raise ConfigError("noise_scale must be >= 0")
        try:
            self.grid
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def grid(self) -> Grid2D:
        return Grid2D(self.nx, self.ny, self.spacing)

    @property
    def max_lag(self) -> float:
        return self.max_lag_factor * max(self.model_x.range, self.model_y.range)

    def to_flat(self) -> dict:
        """Flat key/value form, the same keys a config file accepts."""
        s = self.sinkhorn
        return {
            "nx": self.nx,
            "ny": self.ny,
            "spacing": self.spacing,
            "seed": self.seed,
            "model_x_kind": self.model_x.kind.value,
            "model_x_sill": self.model_x.sill,
            "model_x_range": self.model_x.range,
            "model_y_kind": self.model_y.kind.value,
            "model_y_sill": self.model_y.sill,
            "model_y_range": self.model_y.range,
            "k": s.k,
            "beta": s.beta,
            "lambda": s.lam,
            "max_outer": s.max_outer,
            "max_sinkhorn": s.max_sinkhorn,
            "tol_marginal": s.tol_marginal,
            "n_lags": self.n_lags,
            "max_lag_factor": self.max_lag_factor,
            "hist_bins": self.hist_bins,
            "noise_scale": self.noise_scale,
            "rho_space": self.rho_space,
            "relationships": [r.value for r in self.relationships],
            "methods": list(self.methods),
        }

    @classmethod
    def from_flat(cls, values: dict) -> "ExperimentConfig":
        flat = cls().to_flat()
        unknown = sorted(set(values) - set(flat))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        flat.update(values)
        try:
            rels = flat["relationships"]
            methods = flat["methods"]
            if isinstance(rels, str):
                rels = [r for r in rels.split(",") if r]
            if isinstance(methods, str):
                methods = [m for m in methods.split(",") if m]
            return cls(
                nx=int(flat["nx"]),
                ny=int(flat["ny"]),
                spacing=float(flat["spacing"]),
                seed=int(flat["seed"]),
                model_x=VariogramModel(
                    VariogramKind(flat["model_x_kind"]), float(flat["model_x_sill"]), float(flat["model_x_range"])
                ),
                model_y=VariogramModel(
                    VariogramKind(flat["model_y_kind"]), float(flat["model_y_sill"]), float(flat["model_y_range"])
                ),
                sinkhorn=SinkhornParams(
                    beta=float(flat["beta"]),
                    lam=float(flat["lambda"]),
                    k=int(flat["k"]),
                    max_outer=int(flat["max_outer"]),
                    max_sinkhorn=int(flat["max_sinkhorn"]),
                    tol_marginal=float(flat["tol_marginal"]),
                ),
                n_lags=int(flat["n_lags"]),
                max_lag_factor=float(flat["max_lag_factor"]),
                hist_bins=int(flat["hist_bins"]),
                noise_scale=float(flat["noise_scale"]),
                rho_space=str(flat["rho_space"]),
                relationships=tuple(Relationship(r) for r in rels),
                methods=tuple(str(m) for m in methods),
            )
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path) -> dict:
    """Read a flat YAML mapping of config keys."""
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict) or any(isinstance(v, dict) for v in data.values()):
        raise ConfigError(f"{path}: config must be a flat key/value mapping")
    return data


@dataclass
class CellResult:
    metrics: MetricReport
    x: Field
    y: Field
    seconds: float
    marginal_error: float | None = None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    originals: dict = field(default_factory=dict)  # relationship -> (x, y)
    cells: dict = field(default_factory=dict)  # (relationship, method) -> CellResult

    def metric(self, rel: Relationship, method: str, name: str) -> float:
        m = self.cells[(rel, method)].metrics
        return {"shape": m.shape_similarity, "variogram_x": m.r_gamma_x, "variogram_y": m.r_gamma_y}[name]

    def winner(self, rel: Relationship, name: str) -> str | None:
        """Best method for one metric; ties go to the earlier method."""
        if len(self.config.methods) < 2:
            return None
        best, best_val = None, -math.inf
        for method in self.config.methods:
            v = self.metric(rel, method, name)
            if not math.isnan(v) and v > best_val:
                best, best_val = method, v
        return best

    def tallies(self) -> dict:
        out = {name: {m: 0 for m in self.config.methods} for name in METRICS}
        for rel in self.config.relationships:
            for name in METRICS:
                w = self.winner(rel, name)
                if w is not None:
                    out[name][w] += 1
        return out


def _simulate(method, x, y, config, rng):
    grid = config.grid
    if method == "mst":
        res = mst_direct_detailed(x, y, grid, config.sinkhorn, rng)
        return res.x, res.y, res.coupling.converged, res.coupling.marginal_error
    if method == "copula":
        sx, sy = gaussian_copula_sim(x, y, grid, config.model_x, config.model_y, rng, config.rho_space)
    else:
        sx, sy = lu_joint_sim(x, y, grid, config.model_x, config.model_y, rng, config.rho_space)
    return sx, sy, True, None


def _safe_corr(a, b) -> float:
    try:
        return variogram_correlation(a, b)
    except UndefinedMetricError as exc:
        log.warning("undefined variogram correlation: %s", exc)
        return math.nan


def run_experiments(config: ExperimentConfig = ExperimentConfig()) -> ExperimentReport:
    grid = config.grid
    root = Rng(config.seed)
    report = ExperimentReport(config=config)
    vario = lambda f: empirical_variogram(f, grid, config.n_lags, config.max_lag)  # noqa: E731

    # Every relationship sees the same X, y_raw and per-method draws, so rows
    # differ only through the relationship itself. Streams are keyed by label,
    # so cells can be computed in any order.
    for rel in config.relationships:
        kind = RelationshipKind(rel, config.noise_scale)
        x, y = generate_pair(grid, config.model_x, config.model_y, kind, root.child("data"))
        report.originals[rel] = (x, y)
        gx, gy = vario(x), vario(y)
        for method in config.methods:
            t0 = time.perf_counter()
            sx, sy, converged, merr = _simulate(method, x, y, config, root.child("sim", method))
            seconds = time.perf_counter() - t0
            if not converged:
                log.warning("%s/%s: Sinkhorn did not reach tolerance (error %.3g)", rel.value, method, merr)
            metrics = MetricReport(
                shape_similarity=joint_shape_similarity(x.values, y.values, sx.values, sy.values, config.hist_bins),
                r_gamma_x=_safe_corr(gx, vario(sx)),
                r_gamma_y=_safe_corr(gy, vario(sy)),
                sinkhorn_converged=converged,
            )
            report.cells[(rel, method)] = CellResult(metrics, sx, sy, seconds, merr)
            log.info("%-16s %-7s %.2fs", rel.value, method, seconds)
    return report


def _fmt(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.3f}"


def _write_csv(path: Path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _json_num(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return float(v)


def emit_tables(report: ExperimentReport, out_dir) -> list[Path]:
    """Write shape/variogram_x/variogram_y/summary CSVs and report.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = report.config
    methods = list(cfg.methods)
    written = []

    for name in METRICS:
        rows = []
        for rel in cfg.relationships:
            if not all((rel, m) in report.cells for m in methods):
                continue
            rows.append([rel.value] + [_fmt(report.metric(rel, m, name)) for m in methods] + [report.winner(rel, name) or ""])
        path = out / f"{name}.csv"
        _write_csv(path, ["relationship"] + methods + ["winner"], rows)
        written.append(path)

    tallies = report.tallies() if report.cells else {name: {m: 0 for m in methods} for name in METRICS}
    overall = {m: sum(tallies[name][m] for name in METRICS) for m in methods}
    rows = [[name] + [tallies[name][m] for m in methods] for name in METRICS]
    if report.cells:
        rows.append(["overall"] + [overall[m] for m in methods])
    path = out / "summary.csv"
    _write_csv(path, ["metric"] + methods, rows)
    written.append(path)

    cells = []
    for (rel, method), cell in report.cells.items():
        m = cell.metrics
        cells.append({
            "relationship": rel.value,
            "method": method,
            "shape_similarity": _json_num(m.shape_similarity),
            "r_gamma_x": _json_num(m.r_gamma_x),
            "r_gamma_y": _json_num(m.r_gamma_y),
            "sinkhorn_converged": m.sinkhorn_converged,
            "marginal_error": _json_num(cell.marginal_error),
        })
    doc = {
        "config": cfg.to_flat(),
        "cells": cells,
        "wins": tallies,
        "overall": overall,
        "n_cases": len(report.originals),
    }
    path = out / "report.json"
    try:
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    written.append(path)
    return written


def emit_plotdata(report: ExperimentReport, out_dir) -> list[Path]:
    """Scatter and variogram CSVs for external plotting."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = report.config
    grid = cfg.grid
    written = []
    for rel, (x, y) in report.originals.items():
        series = {"original": (x, y)}
        for method in METHODS:
            if (rel, method) in report.cells:
                c = report.cells[(rel, method)]
                series[method] = (c.x, c.y)
        for name, (sx, sy) in series.items():
            path = out / f"scatter_{rel.value}_{name}.csv"
            _write_csv(path, ["x", "y"], [[repr(float(a)), repr(float(b))] for a, b in zip(sx.values, sy.values)])
            written.append(path)

        for var, idx, model in (("x", 0, cfg.model_x), ("y", 1, cfg.model_y)):
            ref = empirical_variogram(series["original"][idx], grid, cfg.n_lags, cfg.max_lag)
            cols = {}
            for method in METHODS:
                if method in series:
                    ev = empirical_variogram(series[method][idx], grid, cfg.n_lags, cfg.max_lag)
                    cols[method] = dict(zip(ev.lag_centers.tolist(), ev.semivariances.tolist()))
            rows = []
            for lag, g in zip(ref.lag_centers.tolist(), ref.semivariances.tolist()):
                row = [repr(lag), repr(g), repr(float(evaluate(model, lag)))]
                for method in METHODS:
                    v = cols.get(method, {}).get(lag)
                    row.append("" if v is None else repr(v))
                rows.append(row)
            path = out / f"variogram_{rel.value}_{var}.csv"
            _write_csv(path, ["lag", "original", "theoretical", *METHODS], rows)
            written.append(path)
    return written

