"""Seeded multi-run recovery experiments and their JSON/CSV reports."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bridge import build_bgfb, check_pr, mcs_from_bgfb, verify_theorem1
from .errors import ConfigError, GraphMcsError
from .filters import (
    PolynomialFilter,
    chebyshev_fit,
    exact_filter,
    meyer_pair,
    mexican_hat_pair,
)
from .graph import (
    Graph,
    laplacian,
    load_edge_list,
    random_bipartite_graph,
    random_sensor_graph,
    swiss_roll_graph,
)
from .metrics import db, mse_db
from .multichannel import McsSystem, assemble_correction, recover_mcs, sss_two_channel
from .sampling import build_Z, recover_single
from .signals import draw_pws, draw_ubp, pws_generators, ubp_generators
from .spectral import eigendecompose

METHODS = ("mcs", "single_ch0", "single_ch1")
GRAPH_TYPES = ("sensor", "swissroll", "bipartite", "edge_list")


def _parse_bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


@dataclass
class ExperimentConfig:
    """Settings of one experiment; every field is a key of the flat ``key = value`` file format.

    ``K`` defaults to ``N / 2`` and ``bandwidth`` to ``K / 4``.
    """

    graph: str = "sensor"
    graph_path: str | None = None
    n: int = 256
    k: int = 6
    seed: int = 1
    bipartite_p: float = 0.3
    model: str = "pws"
    clusters: int = 4
    bandwidth: int | None = None
    kernel: str = "mexhat"
    bgfb_kernel: str = "meyer"
    filter_mode: str = "poly"
    order: int = 50
    K: int | None = None
    runs: int = 30
    sss_mode: str = "exact"
    beta: float | None = None
    ridge: float | None = None
    pinv_tol: float = 1e-10
    fixed_graph: bool = False
    output_json: str | None = None
    output_csv: str | None = None
    dump_path: str | None = None
    include_timing: bool = False

    @classmethod
    def from_mapping(cls, items: dict) -> "ExperimentConfig":
        """Build from string (or already typed) values, coercing by field type."""
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kw = {}
        for key, raw in items.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            if raw is None or not isinstance(raw, str):
                kw[key] = raw
                continue
            t = types[key]
            if raw.strip().lower() in ("", "none") and "None" in t:
                kw[key] = None
                continue
            try:
                if t.startswith("bool"):
                    kw[key] = _parse_bool(raw)
                elif t.startswith("int"):
                    kw[key] = int(raw)
                elif t.startswith("float"):
                    kw[key] = float(raw)
                else:
                    kw[key] = raw.strip()
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from None
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "ExperimentConfig":
        items = {}
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            items[key] = value
        items.update(overrides or {})
        return cls.from_mapping(items)

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.graph in GRAPH_TYPES, f"graph must be one of {GRAPH_TYPES}")
        need(self.graph != "edge_list" or self.graph_path, "graph = edge_list needs graph_path")
        need(self.model in ("pws", "ubp"), "model must be pws or ubp")
        need(self.kernel in ("mexhat", "meyer"), "kernel must be mexhat or meyer")
        need(self.bgfb_kernel in ("meyer", "ideal"), "bgfb_kernel must be meyer or ideal")
        need(self.filter_mode in ("exact", "poly"), "filter_mode must be exact or poly")
        need(self.sss_mode in ("exact", "neumann"), "sss_mode must be exact or neumann")
        need(self.runs >= 1, "runs must be >= 1")
        need(self.n >= 2 and self.k >= 1, "need n >= 2 and k >= 1")
        need(self.order >= 0, "order must be non-negative")
        need(self.clusters >= 2, "clusters must be >= 2")
        need(0.0 < self.bipartite_p <= 1.0, "bipartite_p must lie in (0, 1]")
        need(self.graph != "bipartite" or self.n % 2 == 0, "bipartite graphs need even n")
        for name in ("beta", "ridge", "pinv_tol"):
            v = getattr(self, name)
            need(v is None or v > 0, f"{name} must be positive")
        if self.K is not None and self.graph != "edge_list":
            need(0 < self.K <= self.n, "K must satisfy 0 < K <= n")
        if self.bandwidth is not None:
            need(self.bandwidth >= 1, "bandwidth must be >= 1")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RecoveryReport:
    """Per-run results and aggregates of one experiment."""

    config: dict
    runs: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    timing: dict | None = None
    last: dict | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {"config": self.config, "runs": self.runs, "failures": self.failures, "aggregate": self.aggregate}
        if self.timing is not None:
            out["timing"] = self.timing
        return out


def run_seeds(seed: int, r: int, fixed_graph: bool = False) -> dict:
    """Seeds of run ``r``: independent streams derived from ``(seed, r)``."""
    graph_seed, cluster_seed, signal_seed = (int(s) for s in np.random.SeedSequence([seed, r]).generate_state(3))
    if fixed_graph:
        graph_seed = int(np.random.SeedSequence([seed]).generate_state(1)[0])
    return {"graph": graph_seed, "cluster": cluster_seed, "signal": signal_seed}


def _build_graph(cfg: ExperimentConfig, seed: int) -> Graph:
    if cfg.graph == "sensor":
        return random_sensor_graph(cfg.n, cfg.k, seed)
    if cfg.graph == "swissroll":
        return swiss_roll_graph(cfg.n, cfg.k, seed)
    return load_edge_list(cfg.graph_path)


def _channel_filters(cfg, L, d):
    lmax = d.lmax
    pair = mexican_hat_pair(lmax) if cfg.kernel == "mexhat" else meyer_pair(lmax)
    if cfg.filter_mode == "exact":
        return tuple(exact_filter(d, k) for k in pair), (0.0, 0.0)
    fits = tuple(chebyshev_fit(k, cfg.order, lmax) for k in pair)
    return tuple(PolynomialFilter(L, f) for f in fits), tuple(f.fit_error for f in fits)


def _one_run(cfg: ExperimentConfig, seeds: dict) -> tuple[dict, dict]:
    t0 = time.perf_counter()
    g = _build_graph(cfg, seeds["graph"])
    L = laplacian(g, "combinatorial")
    d = eigendecompose(L, "combinatorial")
    K = cfg.K if cfg.K is not None else g.n // 2
    if not 0 < K <= g.n:
        raise ConfigError(f"K={K} out of range for N={g.n}")
    if cfg.model == "pws":
        bw = cfg.bandwidth if cfg.bandwidth is not None else max(1, K // 4)
        gens = pws_generators(d, cfg.clusters, bw, seed=seeds["cluster"])
        draw = draw_pws(gens, seeds["signal"])
    else:
        gens = ubp_generators(d)
        draw = draw_ubp(gens, seeds["signal"])
    (f0, f1), fit_err = _channel_filters(cfg, L, d)
    a0, a1 = gens
    t1 = time.perf_counter()
    (m0, m1), trace = sss_two_channel(
        build_Z(f0, a0), build_Z(f1, a1), K, beta=cfg.beta, ridge=cfg.ridge, mode=cfg.sss_mode, return_trace=True
    )
    t2 = time.perf_counter()
    sys = McsSystem.critical(f0, a0, f1, a1, m0)
    x = draw.x
    corr = assemble_correction(sys, cfg.pinv_tol)
    rec = recover_mcs(sys, x, corr)
    ch0, ch1 = sys.channels
    r0 = recover_single(ch0, ch0.sample_matrix(x), cfg.pinv_tol)
    r1 = recover_single(ch1, ch1.sample_matrix(x), cfg.pinv_tol)
    t3 = time.perf_counter()
    rec_signals = {"mcs": rec.signal, "single_ch0": r0.signal, "single_ch1": r1.signal}
    record = {
        "seeds": seeds,
        "n": g.n,
        "K": K,
        "mse_db": {m: mse_db(x, s) for m, s in rec_signals.items()},
        "mse": {m: float(np.sum((x - s) ** 2) / g.n) for m, s in rec_signals.items()},
        "cond": {"mcs": rec.cond, "single_ch0": r0.cond, "single_ch1": r1.cond},
        "rank": {"mcs": rec.rank, "single_ch0": r0.rank, "single_ch1": r1.rank},
        "generator_rank": list(gens.ranks),
        "fit_error": list(fit_err),
        "sss": {"floor_hits": trace.floor_hits, "fallbacks": trace.fallbacks, "ridge": trace.ridge},
        "timing": {"build": t1 - t0, "sss": t2 - t1, "recover": t3 - t2},
    }
    return record, {"graph": g, "x": x, **rec_signals}


def _one_bipartite_run(cfg: ExperimentConfig, seeds: dict) -> tuple[dict, dict]:
    t0 = time.perf_counter()
    h = cfg.n // 2
    g, part = random_bipartite_graph(h, h, cfg.bipartite_p, seeds["graph"])
    fb = build_bgfb(g, part, cfg.bgfb_kernel)
    pr = check_pr(fb)
    thm = verify_theorem1(fb)
    sys = mcs_from_bgfb(fb)
    x = np.random.default_rng(seeds["signal"]).standard_normal(g.n)
    rec = recover_mcs(sys, x, assemble_correction(sys, cfg.pinv_tol))
    ch0, ch1 = sys.channels
    r0 = recover_single(ch0, ch0.sample_matrix(x), cfg.pinv_tol)
    r1 = recover_single(ch1, ch1.sample_matrix(x), cfg.pinv_tol)
    rec_signals = {"mcs": rec.signal, "single_ch0": r0.signal, "single_ch1": r1.signal}
    record = {
        "seeds": seeds,
        "n": g.n,
        "K": h,
        "mse_db": {m: mse_db(x, s) for m, s in rec_signals.items()},
        "mse": {m: float(np.sum((x - s) ** 2) / g.n) for m, s in rec_signals.items()},
        "cond": {"mcs": rec.cond, "single_ch0": r0.cond, "single_ch1": r1.cond},
        "rank": {"mcs": rec.rank, "single_ch0": r0.rank, "single_ch1": r1.rank},
        "pr_defect": pr.defect,
        "theorem1": dataclasses.asdict(thm),
        "timing": {"total": time.perf_counter() - t0},
    }
    return record, {"graph": g, "x": x, **rec_signals}


def _aggregate(runs: list) -> dict:
    agg = {}
    for m in METHODS:
        mses = [r["mse"][m] for r in runs]
        dbs = [r["mse_db"][m] for r in runs]
        agg[m] = {
            "mean_db_of_mse": db(float(np.mean(mses))) if mses else float("nan"),
            "mean_of_dbs": float(np.mean(dbs)) if dbs else float("nan"),
        }
    if runs and "pr_defect" in runs[0]:
        agg["max_pr_defect"] = max(r["pr_defect"] for r in runs)
    return agg


def run_experiment(cfg: ExperimentConfig, keep_last: bool = False) -> RecoveryReport:
    """Run ``cfg.runs`` independent seeded repetitions and aggregate them.

    A run that raises a package error is recorded in ``failures`` and the
    remaining runs continue. Averages are taken over successful runs.
    """
    cfg.validate()
    report = RecoveryReport(config=cfg.as_dict())
    step = _one_bipartite_run if cfg.graph == "bipartite" else _one_run
    t_start = time.perf_counter()
    for r in range(cfg.runs):
        seeds = run_seeds(cfg.seed, r, cfg.fixed_graph)
        try:
            record, signals = step(cfg, seeds)
        except (GraphMcsError, np.linalg.LinAlgError) as exc:
            report.failures.append({"run": r, "error": type(exc).__name__, "message": str(exc)})
            continue
        record = {"run": r, **record}
        timing = record.pop("timing")
        if cfg.include_timing:
            record["timing"] = timing
        report.runs.append(record)
        if keep_last:
            report.last = signals
    report.aggregate = _aggregate(report.runs)
    if cfg.include_timing:
        report.timing = {"total": time.perf_counter() - t_start}
    return report


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


CSV_COLUMNS = (
    "run",
    "graph_seed",
    "signal_seed",
    "mse_db_mcs",
    "mse_db_single_ch0",
    "mse_db_single_ch1",
    "cond_mcs",
    "rank_mcs",
    "pr_defect",
    "error",
)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return _jsonable(v) if not math.isfinite(v) else repr(v)
    return str(v)


def emit_report(report: RecoveryReport, path, fmt: str = "json") -> Path:
    """Write the report as JSON (full tree) or CSV (one row per run, failures included).

    Non-finite numbers are written as ``"-inf"``, ``"inf"`` or ``"nan"``.
    """
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(_jsonable(report.to_dict()), indent=2, sort_keys=True) + "\n")
        return path
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    rows = {}
    for r in report.runs:
        rows[r["run"]] = {
            "run": r["run"],
            "graph_seed": r["seeds"]["graph"],
            "signal_seed": r["seeds"]["signal"],
            **{f"mse_db_{m}": r["mse_db"][m] for m in METHODS},
            "cond_mcs": r["cond"]["mcs"],
            "rank_mcs": r["rank"]["mcs"],
            "pr_defect": r.get("pr_defect"),
        }
    for f in report.failures:
        rows[f["run"]] = {"run": f["run"], "error": f"{f['error']}: {f['message']}"}
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for run in sorted(rows):
            w.writerow([_fmt(rows[run].get(c)) for c in CSV_COLUMNS])
    return path


def emit_signal_dump(graph: Graph, signals: dict, path) -> Path:
    """CSV with columns vertex, x-coord, y-coord, original, mcs, ch0, ch1 (one row per vertex)."""
    path = Path(path)
    n = graph.n
    coords = graph.coords if graph.coords is not None else np.full((n, 2), np.nan)
    if coords.shape[1] == 1:
        coords = np.column_stack([coords[:, 0], np.full(n, np.nan)])
    cols = [np.asarray(signals[k], dtype=float) for k in ("x", "mcs", "single_ch0", "single_ch1")]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "x_coord", "y_coord", "original", "mcs", "ch0", "ch1"])
        for i in range(n):
            w.writerow([i, repr(float(coords[i, 0])), repr(float(coords[i, 1]))] + [repr(float(c[i])) for c in cols])
    return path
