"""Command-line entry point ``graph-mcs``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .bench import ExperimentConfig, emit_report, emit_signal_dump, run_experiment
from .bridge import build_bgfb, check_pr, verify_theorem1
from .errors import ConfigError, GraphError, GraphMcsError, NumericalError
from .filters import PolynomialFilter, chebyshev_fit, exact_filter, meyer_pair, mexican_hat_pair
from .graph import laplacian, load_edge_list, load_partition
from .multichannel import sss_two_channel
from .sampling import build_Z
from .signals import pws_generators, ubp_generators
from .spectral import eigendecompose

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

# flag name -> config key
RUN_FLAGS = {
    "graph": str,
    "graph_path": str,
    "n": int,
    "k": int,
    "seed": int,
    "model": str,
    "kernel": str,
    "filter_mode": str,
    "order": int,
    "K": int,
    "runs": int,
    "sss_mode": str,
    "output_json": str,
    "output_csv": str,
    "dump_path": str,
}


def _add_run(sub):
    p = sub.add_parser("run", help="run a seeded recovery experiment")
    p.add_argument("--config", help="flat key = value config file")
    for key, typ in RUN_FLAGS.items():
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)
    p.add_argument("--fixed-graph", action="store_true", default=None)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override any config key")
    p.add_argument("--quiet", action="store_true")


def _add_verify(sub):
    p = sub.add_parser("verify-pr", help="check perfect reconstruction of a bipartite filter bank")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--partition", required=True, help="file listing the low-set vertices")
    p.add_argument("--kernels", choices=("meyer", "ideal"), default="meyer")


def _add_sss(sub):
    p = sub.add_parser("sss", help="two-channel sampling set selection on a graph")
    p.add_argument("--graph", required=True, help="edge-list file")
    p.add_argument("--channels", default="mexhat:pws", help="KERNEL:MODEL, kernel in {mexhat, meyer}, model in {pws, ubp}")
    p.add_argument("--k", type=int, required=True, dest="K", help="size of the channel-0 sampling set")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--clusters", type=int, default=4)
    p.add_argument("--bandwidth", type=int, default=None)
    p.add_argument("--filter-mode", choices=("exact", "poly"), default="exact")
    p.add_argument("--order", type=int, default=50)
    p.add_argument("--sss-mode", choices=("exact", "neumann"), default="exact")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graph-mcs", description="Multi-channel sampling of graph signals")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_verify(sub)
    _add_sss(sub)
    return parser


def _cmd_run(args) -> int:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    for key in list(RUN_FLAGS) + ["fixed_graph"]:
        v = getattr(args, key)
        if v is not None:
            overrides[key] = v
    if args.config:
        cfg = ExperimentConfig.from_file(args.config, overrides)
    else:
        cfg = ExperimentConfig.from_mapping(overrides)
    report = run_experiment(cfg, keep_last=cfg.dump_path is not None)
    if cfg.output_json:
        emit_report(report, cfg.output_json, "json")
    if cfg.output_csv:
        emit_report(report, cfg.output_csv, "csv")
    if cfg.dump_path and report.last is not None:
        emit_signal_dump(report.last["graph"], report.last, cfg.dump_path)
    if not args.quiet:
        for method, agg in report.aggregate.items():
            if isinstance(agg, dict):
                print(f"{method:12s} mean_db_of_mse={agg['mean_db_of_mse']:.2f} mean_of_dbs={agg['mean_of_dbs']:.2f}")
            else:
                print(f"{method:12s} {agg:.3e}")
        print(f"runs ok={len(report.runs)} failed={len(report.failures)}")
    if not report.runs:
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_verify(args) -> int:
    g = load_edge_list(args.graph)
    part = load_partition(args.partition, g)
    fb = build_bgfb(g, part, args.kernels)
    pr = check_pr(fb)
    thm = verify_theorem1(fb)
    print(json.dumps({"pr": pr.pr, "defect": pr.defect, **thm.__dict__}, indent=2))
    return EXIT_OK if pr.pr else EXIT_NUMERICAL


def _cmd_sss(args) -> int:
    try:
        kernel, model = args.channels.split(":")
    except ValueError:
        raise ConfigError(f"--channels expects KERNEL:MODEL, got {args.channels!r}") from None
    if kernel not in ("mexhat", "meyer") or model not in ("pws", "ubp"):
        raise ConfigError(f"unknown channel spec {args.channels!r}")
    g = load_edge_list(args.graph)
    if not 0 < args.K <= g.n:
        raise ConfigError(f"--k must lie in [1, {g.n}]")
    L = laplacian(g, "combinatorial")
    d = eigendecompose(L)
    pair = mexican_hat_pair(d.lmax) if kernel == "mexhat" else meyer_pair(d.lmax)
    if args.filter_mode == "exact":
        filters = [exact_filter(d, k) for k in pair]
    else:
        filters = [PolynomialFilter(L, chebyshev_fit(k, args.order, d.lmax)) for k in pair]
    if model == "pws":
        bw = args.bandwidth if args.bandwidth is not None else max(1, args.K // 4)
        gens = pws_generators(d, args.clusters, bw, seed=args.seed)
    else:
        gens = ubp_generators(d)
    m0, m1 = sss_two_channel(build_Z(filters[0], gens.a0), build_Z(filters[1], gens.a1), args.K, mode=args.sss_mode)
    print(" ".join(map(str, m0)))
    print(" ".join(map(str, m1)))
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "verify-pr": _cmd_verify, "sss": _cmd_sss}[args.command]
    try:
        return handler(args)
    except (ConfigError, GraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, GraphMcsError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
