"""Command-line entry point.

Subcommands: estimate, centrality, test, rolling, simulate, compare.
Exit codes: 0 success, 1 statistical/assertion failure, 2 input error,
3 numerical failure.  A JSON config file may replace flags; explicit
flags win on conflict.  All randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .centrality import (
    CentralityReport,
    degree_centrality,
    degree_threshold_p95,
    leontief_kernel,
    system_debt_rank,
)
from .errors import (
    DegenerateStatisticError,
    EstimationError,
    KbnetError,
    NumericalError,
    PanelError,
    StationarityError,
)
from .inference import KBVarianceEngine, test_nonzero, test_pairwise, validated_node_kb
from .panel import (
    ReturnPanel,
    WindowSpec,
    load_panel,
    load_weights,
    log_returns,
    make_windows,
    moving_average,
)
from .simulate import SimulationConfig, run_monte_carlo
from .var import estimate_var1, spectral_radius, EstimatedNetwork

EXIT_OK = 0
EXIT_STAT = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _add_common(p):
    p.add_argument("--config", help="JSON file with defaults for any flag")
    p.add_argument("--output", "-o", help="output file (default stdout)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--confidence", type=float, default=0.975)
    p.add_argument("--weights", help="label,weight CSV (default unit weights)")
    p.add_argument("--cov-mode", choices=["paper", "standard"], default="standard")
    p.add_argument("--degree-threshold", default="p95", help="edge threshold or 'p95'")
    p.add_argument("--debtrank-impact", choices=["abs", "relu"], default="abs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate a network from a panel CSV")
    p.add_argument("input", help="panel CSV")
    p.add_argument("--levels-are-returns", action="store_true")
    p.add_argument("--demean", choices=["on", "off"], default="on")
    p.add_argument("--missing", choices=["strict", "ffill"], default="strict")
    _add_common(p)

    p = sub.add_parser("centrality", help="centrality report for a network JSON")
    p.add_argument("input", help="network JSON from 'estimate'")
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    _add_common(p)

    p = sub.add_parser("test", help="Z-tests for a network JSON")
    p.add_argument("input", help="network JSON from 'estimate'")
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--pairs", help="pairwise tests, e.g. '0,1;0,2'")
    p.add_argument("--all-pairs", action="store_true")
    _add_common(p)

    p = sub.add_parser("rolling", help="windowed centrality series from a panel CSV")
    p.add_argument("input", help="panel CSV")
    p.add_argument("--window", type=int, required=True, help="window length (observations)")
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--levels-are-returns", action="store_true")
    p.add_argument("--missing", choices=["strict", "ffill"], default="strict")
    p.add_argument("--smooth", type=int, default=1, help="trailing moving-average width")
    p.add_argument("--fail-fast", action="store_true")
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo validation study")
    p.add_argument("--t-len", type=int, default=600)
    p.add_argument("--n-reps", type=int, default=2000)
    p.add_argument("--burn-in", type=int, default=100)
    p.add_argument("--assert-coverage", help="lo,hi bounds; exit 1 outside")
    p.add_argument("--qq-output", help="QQ CSV path")
    _add_common(p)

    p = sub.add_parser("compare", help="KB vs degree, eigenvalue and DebtRank")
    p.add_argument("input", help="network JSON from 'estimate'")
    _add_common(p)

    return parser


def _apply_config_file(args, parser):
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise PanelError(f"cannot read config file: {exc}") from exc
    known = set(vars(args))
    for key, value in doc.items():
        attr = key.replace("-", "_")
        if attr not in known:
            raise PanelError(f"unknown config key {key!r}")
        # flags given explicitly on the command line win
        if f"--{key}" not in sys.argv and f"--{attr}" not in sys.argv:
            setattr(args, attr, value)
    return args


def _stamp(args) -> str:
    # jobs and output are excluded: neither affects the numbers, and the
    # same seed must yield byte-identical files at any parallelism level
    # or destination path
    resolved = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "jobs", "output")
    }
    return "# " + json.dumps(resolved, default=str)


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_returns(args) -> ReturnPanel:
    panel = load_panel(args.input, missing=getattr(args, "missing", "strict"))
    if args.levels_are_returns:
        return ReturnPanel(labels=panel.labels, timestamps=panel.timestamps, values=panel.values)
    return log_returns(panel)


def _get_weights(args, labels) -> np.ndarray:
    if args.weights:
        return load_weights(args.weights, labels)
    return np.ones(len(labels))


def _resolve_threshold(args, a) -> float:
    raw = args.degree_threshold
    if isinstance(raw, str) and raw.lower() == "p95":
        return degree_threshold_p95(a)
    return float(raw)


def cmd_estimate(args) -> int:
    returns = _load_returns(args)
    net = estimate_var1(returns, demean=args.demean == "on")
    cert = spectral_radius(net.a_hat)
    doc = json.loads(net.to_json())
    doc["stationarity"] = {
        "spectral_radius": cert.spectral_radius,
        "pass": cert.passed,
        "tolerance_used": cert.tolerance_used,
    }
    if not cert.passed:
        print(
            f"warning: spectral radius {cert.spectral_radius:.6f} is not below one; "
            "centrality computations will refuse this network",
            file=sys.stderr,
        )
    _emit(json.dumps(doc) + "\n", args.output)
    return EXIT_OK


def _read_network(path) -> EstimatedNetwork:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return EstimatedNetwork.from_json(fh.read())
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise PanelError(f"cannot read network JSON: {exc}") from exc


def cmd_centrality(args) -> int:
    net = _read_network(args.input)
    kernel = leontief_kernel(net.a_hat, alpha=args.alpha)
    w = _get_weights(args, net.labels)
    report = CentralityReport.from_kernel(kernel, w, net.labels)
    if args.format == "json":
        _emit(report.to_json() + "\n", args.output)
    else:
        _emit(_stamp(args) + "\n" + report.to_csv(), args.output)
    return EXIT_OK


def cmd_test(args) -> int:
    net = _read_network(args.input)
    kernel = leontief_kernel(net.a_hat, alpha=args.alpha)
    engine = KBVarianceEngine(net, kernel)
    w = _get_weights(args, net.labels)
    validated, results = validated_node_kb(engine, w, conf=args.confidence)

    lines = [_stamp(args)]
    lines.append("label,estimate,std_error,z,p_value,reject,ci_lower,ci_upper,validated_value")
    for lab, res, val in zip(net.labels, results, validated):
        lines.append(
            f"{lab},{res.estimate!r},{res.std_error!r},{res.statistic!r},{res.p_value!r},"
            f"{int(res.reject)},{res.ci[0]!r},{res.ci[1]!r},{float(val)!r}"
        )

    pairs = []
    if args.all_pairs:
        m = net.n_nodes
        pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    elif args.pairs:
        for chunk in args.pairs.split(";"):
            i, j = (int(s) for s in chunk.split(","))
            pairs.append((i, j))
    if pairs:
        lines.append("pair_i,pair_j,estimate,std_error,z,p_value,reject")
        for i, j in pairs:
            res = test_pairwise(engine, i, j, w, level=0.05, cov_mode=args.cov_mode,
                                conf=args.confidence)
            lines.append(
                f"{i},{j},{res.estimate!r},{res.std_error!r},{res.statistic!r},"
                f"{res.p_value!r},{int(res.reject)}"
            )
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def _rolling_row(task):
    """Per-window worker: returns the numeric cells for one output row."""
    values, labels, timestamps, alpha, conf, threshold_raw, impact, weights = task
    window = ReturnPanel(labels=labels, timestamps=timestamps, values=values)
    net = estimate_var1(window)
    cert = spectral_radius(net.a_hat)
    kernel = leontief_kernel(net.a_hat, alpha=alpha)
    engine = KBVarianceEngine(net, kernel)
    w = weights
    node = kernel.pair_kb @ w
    validated, results = validated_node_kb(engine, w, conf=conf)
    if isinstance(threshold_raw, str) and threshold_raw.lower() == "p95":
        threshold = degree_threshold_p95(net.a_hat)
    else:
        threshold = float(threshold_raw)
    _, degree_sys = degree_centrality(net.a_hat, threshold)
    dr = system_debt_rank(net.a_hat, impact=impact)
    row = [float(node.sum()), float(validated.sum()), degree_sys, cert.spectral_radius, dr]
    for i in range(len(labels)):
        row.extend([float(node[i]), float(validated[i]), results[i].ci[0], results[i].ci[1]])
    return row


def cmd_rolling(args) -> int:
    returns = _load_returns(args)
    spec = WindowSpec(window_length=args.window, step=args.step)
    windows = make_windows(returns, spec)
    w = _get_weights(args, returns.labels)

    tasks = [
        (
            np.array(win.values), win.labels, win.timestamps, args.alpha, args.confidence,
            args.degree_threshold, args.debtrank_impact, w,
        )
        for win in windows
    ]
    n_numeric = 5 + 4 * len(returns.labels)
    rows = []
    if args.jobs <= 1 or len(tasks) < 2:
        runs = []
        for task in tasks:
            try:
                runs.append(_rolling_row(task))
            except KbnetError as exc:
                if args.fail_fast:
                    raise
                print(f"warning: window failed: {exc}", file=sys.stderr)
                runs.append([float("nan")] * n_numeric)
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_rolling_row, task) for task in tasks]
            runs = []
            for fut in futures:
                try:
                    runs.append(fut.result())
                except KbnetError as exc:
                    if args.fail_fast:
                        raise
                    print(f"warning: window failed: {exc}", file=sys.stderr)
                    runs.append([float("nan")] * n_numeric)
    matrix = np.array(runs, dtype=float)
    if args.smooth > 1 and len(matrix):
        for col in range(matrix.shape[1]):
            matrix[:, col] = moving_average(matrix[:, col], args.smooth)

    header = ["window_start", "window_end", "system_kb", "validated_system_kb",
              "degree_system", "leading_eigenvalue", "debtrank_system"]
    for lab in returns.labels:
        header.extend([f"{lab}_kb", f"{lab}_validated", f"{lab}_ci_lower", f"{lab}_ci_upper"])
    lines = [_stamp(args), ",".join(header)]
    for win, row in zip(windows, matrix):
        cells = [str(win.timestamps[0]), str(win.timestamps[-1])]
        cells.extend(repr(float(v)) for v in row)
        lines.append(",".join(cells))
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = SimulationConfig(
        t_len=args.t_len, n_reps=args.n_reps, seed=args.seed, burn_in=args.burn_in
    )
    summary = run_monte_carlo(config, jobs=args.jobs)
    _emit(summary.to_json() + "\n", args.output)
    if args.qq_output:
        with open(args.qq_output, "w", encoding="utf-8") as fh:
            fh.write(_stamp(args) + "\n" + summary.qq_csv())
    if args.assert_coverage:
        lo, hi = (float(s) for s in args.assert_coverage.split(","))
        worst_lo = float(summary.coverage.min())
        worst_hi = float(summary.coverage.max())
        if worst_lo < lo or worst_hi > hi:
            print(
                f"coverage {summary.coverage.tolist()} outside [{lo}, {hi}]",
                file=sys.stderr,
            )
            return EXIT_STAT
    return EXIT_OK


def cmd_compare(args) -> int:
    net = _read_network(args.input)
    kernel = leontief_kernel(net.a_hat, alpha=args.alpha)
    engine = KBVarianceEngine(net, kernel)
    w = _get_weights(args, net.labels)
    node = kernel.pair_kb @ w
    validated, _ = validated_node_kb(engine, w, conf=args.confidence)
    threshold = _resolve_threshold(args, net.a_hat)
    _, degree_sys = degree_centrality(net.a_hat, threshold)
    cert = spectral_radius(net.a_hat)
    dr = system_debt_rank(net.a_hat, impact=args.debtrank_impact)
    lines = [
        _stamp(args),
        "measure,value",
        f"system_kb,{float(node.sum())!r}",
        f"validated_system_kb,{float(validated.sum())!r}",
        f"degree_system,{float(degree_sys)!r}",
        f"leading_eigenvalue,{float(cert.spectral_radius)!r}",
        f"debtrank_system,{float(dr)!r}",
    ]
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


_COMMANDS = {
    "estimate": cmd_estimate,
    "centrality": cmd_centrality,
    "test": cmd_test,
    "rolling": cmd_rolling,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config_file(args, parser)
        return _COMMANDS[args.command](args)
    except PanelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EstimationError, StationarityError, NumericalError, DegenerateStatisticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
