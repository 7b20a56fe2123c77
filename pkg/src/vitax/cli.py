"""Command-line interface: ``vitax {explain,verify,benchmark,heatmap}``.

Exit codes: 0 success, 1 input error, 2 solver failure, 3 empty explanation.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .benchmark import benchmark_matrix, epsilon_sweep, heuristic_benchmark
from .errors import MalformedInput, SolverError, VitaxError
from .explain import (
    ExplainRequest,
    brute_force_explain,
    verify_subset_bounds,
    vitax_explain,
)
from .heuristics import Heuristic
from .metrics import fidelity, ne_robustness, stopwatch, worst_case_input
from .model import gradient, load_network
from .reach import DEFAULT_SPLIT_BUDGET, Solver

log = logging.getLogger("vitax")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_EMPTY = 3


class InputError(Exception):
    pass


def _configure_logging():
    level = os.environ.get("VITAX_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(
        level=levels.get(level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s"
    )


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"not a comma-separated list of numbers: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; argparse's default status 2 means solver failure here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vitax", description="Verified targeted semifactual explanations.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = _Parser(add_help=False)
    common.add_argument("--model", required=True, help="model file (JSON)")
    common.add_argument("--data", help="dataset CSV: label,f1,...,fn per row")
    common.add_argument("--epsilon", type=float, default=0.05)
    common.add_argument("--solver", choices=[s.value for s in Solver], default="interval")
    common.add_argument("--heuristic", choices=[h.value for h in Heuristic], default="saliency")
    common.add_argument("--dominance", action="store_true", help="also require u_t > u_k")
    common.add_argument("--clamp", action="store_true", help="intersect the box with [0,1]^n")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=DEFAULT_SPLIT_BUDGET,
                        help="ReLU split budget of the exact solver")
    common.add_argument("--out", default=".", help="output directory")

    single = _Parser(add_help=False)
    single.add_argument("--index", type=int, help="row of --data to explain")
    single.add_argument("--input", help="inline comma-separated input vector")
    single.add_argument("--y", type=int, help="original class (default: the prediction)")
    single.add_argument("--target", type=int, required=True)

    p = sub.add_parser("explain", parents=[common, single], help="compute an explanation")
    p.add_argument("--trials", type=int, default=500, help="noisy-execution trials")
    p.add_argument("--runs", type=int, help="use the random-ordering brute-force baseline")
    p.add_argument("--heatmap", action="store_true", help="also write heatmap.ppm")
    p.add_argument("--with-ranking", action="store_true", help="store the full ranking")
    p.add_argument("--timing", action="store_true",
                   help="record wall times (makes the result file non-reproducible)")

    p = sub.add_parser("verify", parents=[common, single], help="check an explicit subset")
    p.add_argument("--subset", required=True,
                   help="index list: result file, JSON list or comma-separated integers")

    p = sub.add_parser("heatmap", parents=[common, single], help="render an explanation")
    p.add_argument("--result", help="reuse A from a result file instead of recomputing")

    p = sub.add_parser("benchmark", parents=[common], help="dataset-level tables")
    p.add_argument("--epsilons", default="0.02,0.05,0.1,0.2")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--samples-per-class", type=int, default=5)
    p.add_argument("--heuristics", default="saliency,ig,random")
    return parser


# -- helpers ---------------------------------------------------------------------------


def _load_model(args):
    path = Path(args.model)
    if not path.is_file():
        raise InputError(f"model file not found: {path}")
    return load_network(path)


def _load_data(args, net):
    if not args.data:
        return None, None
    path = Path(args.data)
    if not path.is_file():
        raise InputError(f"dataset file not found: {path}")
    return io.load_dataset(path, net.n)


def _resolve_input(args, net, X):
    if args.input is not None:
        x = np.array(_floats(args.input))
        if x.size != net.n:
            raise InputError(f"--input has {x.size} values, the model expects {net.n}")
        return x
    if args.index is None or X is None:
        raise InputError("give either --input or --data with --index")
    if not 0 <= args.index < len(X):
        raise InputError(f"--index {args.index} outside the dataset (0..{len(X) - 1})")
    return X[args.index]


def _config(args) -> dict:
    keys = [
        "command", "model", "data", "index", "input", "y", "target", "epsilon", "solver",
        "heuristic", "dominance", "clamp", "seed", "trials", "runs", "budget",
    ]
    return {k: getattr(args, k, None) for k in keys}


def _request(args, net, x) -> ExplainRequest:
    return ExplainRequest(
        net, x, args.target, args.epsilon, y=args.y, solver=args.solver,
        heuristic=args.heuristic, dominance=args.dominance, clamp_domain=args.clamp,
        seed=args.seed, budget=args.budget,
    )


def read_subset(path, n: int) -> list:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"subset file not found: {path}")
    text = path.read_text().strip()
    try:
        doc = json.loads(text) if text else []
    except json.JSONDecodeError:
        doc = [v for v in text.replace("\n", ",").split(",") if v.strip()]
    if isinstance(doc, dict):
        if "A" not in doc:
            raise InputError(f"{path}: object has no 'A' field")
        doc = doc["A"]
    if isinstance(doc, (int, float)):
        doc = [doc]
    try:
        idx = [int(str(v).strip()) for v in doc]
    except ValueError:
        raise InputError(f"{path}: subset entries must be integers") from None
    if len(set(idx)) != len(idx):
        raise InputError(f"{path}: duplicate feature indices")
    bad = [i for i in idx if not 0 <= i < n]
    if bad:
        raise InputError(f"{path}: indices {bad} outside [0, {n})")
    return idx


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


# -- commands --------------------------------------------------------------------------


def cmd_explain(args) -> int:
    net = _load_model(args)
    X, labels = _load_data(args, net)
    x = _resolve_input(args, net, X)
    req = _request(args, net, x)
    with stopwatch() as sw:
        if args.runs:
            exp, fid = brute_force_explain(req, runs=args.runs)
        else:
            exp = vitax_explain(req)
            fid = None
    if fid is None:
        x_adv = worst_case_input(net, x, exp.A, req.epsilon, req.t, req.clamp_domain)
        fid = fidelity(net, x, x_adv, req.y, req.t)
    ne = None
    if X is not None:
        donors = X[labels == req.t]
        if len(donors):
            ne = ne_robustness(net, x, exp.A, req.t, donors, trials=args.trials, seed=args.seed)
        else:
            log.info("no donors of class %d in the dataset; skipping NE robustness", req.t)
    stats = {
        "bound_queries": exp.stats.bound_queries,
        "lp_solves": exp.stats.lp_solves,
        "relu_splits": exp.stats.relu_splits,
    }
    record = io.ResultRecord(
        config=_config(args),
        y=req.y,
        t=req.t,
        A=list(exp.A),
        cardinality=len(exp.A),
        cardinality_pct=len(exp.A) / net.n,
        violating_classes=list(exp.violating_classes),
        oracle_calls=exp.oracle_calls,
        stats=stats,
        final_bounds=[list(iv) for iv in exp.final_bounds.intervals] if exp.final_bounds else None,
        maximal_certified=exp.maximal_certified,
        fidelity=fid,
        ne_robustness=ne,
        wall_time={"explain": sw.elapsed, "solver": exp.stats.wall_time} if args.timing else None,
        pi=[int(i) for i in exp.pi.order] if args.with_ranking else None,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_result(record, out / "result.json")
    if args.heatmap:
        _heatmap(net, x, exp.A, req.t, out / "heatmap.ppm")
    if not exp.A:
        print(
            f"empty explanation: the prediction is not robust toward class {req.t} at "
            f"epsilon={req.epsilon}; try a smaller epsilon",
            file=sys.stderr,
        )
        return EXIT_EMPTY
    print(f"|A| = {len(exp.A)} of {net.n} features; wrote {out / 'result.json'}")
    return EXIT_OK


def cmd_verify(args) -> int:
    net = _load_model(args)
    X, _ = _load_data(args, net)
    x = _resolve_input(args, net, X)
    subset = read_subset(args.subset, net.n)
    req = _request(args, net, x)
    res, bounds = verify_subset_bounds(
        net, x, req.y, req.t, req.epsilon, subset, req.solver, req.dominance,
        req.clamp_domain, req.budget,
    )
    doc = {
        "config": _config(args),
        "y": req.y,
        "t": req.t,
        "A": subset,
        "holds": res.holds,
        "target_margin": res.target_margin,
        "violating_classes": list(res.violating_classes),
        "bounds": [list(iv) for iv in bounds.intervals],
    }
    path = _write(Path(args.out), "verify.json", io.dumps(doc) + "\n")
    print(f"holds={res.holds} margin={res.target_margin:.6g}; wrote {path}")
    return EXIT_OK


def _heatmap(net, x, subset, t, path):
    img = io.render_heatmap(x, net.input_shape, subset, gradient(net, x, t))
    io.write_ppm(path, img)


def cmd_heatmap(args) -> int:
    net = _load_model(args)
    X, _ = _load_data(args, net)
    x = _resolve_input(args, net, X)
    if args.result:
        record = io.read_result(args.result)
        subset = record.A
    else:
        subset = vitax_explain(_request(args, net, x)).A
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _heatmap(net, x, subset, args.target, out / "heatmap.ppm")
    print(f"wrote {out / 'heatmap.ppm'}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    net = _load_model(args)
    X, labels = _load_data(args, net)
    if X is None:
        raise InputError("benchmark needs --data")
    out = Path(args.out)
    epsilons = _floats(args.epsilons)
    heuristics = [h.strip() for h in args.heuristics.split(",") if h.strip()]
    try:
        heuristics = [Heuristic(h) for h in heuristics]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    common = dict(solver=args.solver, seed=args.seed, clamp_domain=args.clamp, budget=args.budget)

    stage = "cardinality.csv"
    try:
        matrix = benchmark_matrix(
            net, X, labels, args.epsilon, heuristic=args.heuristic,
            samples_per_class=args.samples_per_class, **common,
        )
        _write(out, "cardinality.csv", io.csv_text(["y", "t", "mean_pct", "count"], matrix.rows()))

        stage = "heuristics.csv"
        table = heuristic_benchmark(
            net, X, labels, args.epsilon, heuristics=heuristics, samples=args.samples, **common
        )
        rows = [
            (h, c, v) for h, per_class in table.means().items() for c, v in per_class.items()
        ]
        _write(out, "heuristics.csv", io.csv_text(["heuristic", "class", "mean_card"], rows))

        stage = "epsilon_sweep.csv"
        sweep_rows = epsilon_sweep(
            net, X, labels, sorted(epsilons), heuristic=args.heuristic, samples=args.samples,
            **common,
        )
    except SolverError:
        headers = {
            "cardinality.csv": ["y", "t", "mean_pct", "count"],
            "heuristics.csv": ["heuristic", "class", "mean_card"],
            "epsilon_sweep.csv": ["epsilon", "sample", "card"],
        }
        _write(out, stage, io.csv_text(headers[stage], [], partial=True))
        raise
    _write(out, "epsilon_sweep.csv", io.csv_text(["epsilon", "sample", "card"], sweep_rows))
    if Solver(args.solver) is not Solver.RELAX:
        _check_sweep(sweep_rows)
    print(f"wrote cardinality.csv, heuristics.csv, epsilon_sweep.csv to {out}")
    return EXIT_OK


def _check_sweep(rows):
    by_sample = {}
    for eps, sample, card in rows:
        by_sample.setdefault(sample, []).append((eps, card))
    for sample, seq in by_sample.items():
        cards = [c for _, c in sorted(seq)]
        if any(b > a for a, b in zip(cards, cards[1:])):
            log.error("sample %d: |A| grows with epsilon %s", sample, cards)


COMMANDS = {
    "explain": cmd_explain,
    "verify": cmd_verify,
    "heatmap": cmd_heatmap,
    "benchmark": cmd_benchmark,
}


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InputError, MalformedInput) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (VitaxError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
