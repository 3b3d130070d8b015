"""Command-line entry point.

Exit codes: 0 success, 1 experiment failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import harness
from .anneal import AnnealConfig, TrainingSet, error_functional, max_deviation, train
from .approximation import ApproximationError, RectDomain, build

log = logging.getLogger("qneuron")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_EXPR_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "pi", "e",
                 "sinh", "cosh", "tanh", "arctan", "minimum", "maximum", "where")
}


class UsageError(Exception):
    pass


def _load_config(path: str | None, seed: int) -> AnnealConfig:
    data = {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
    data["rng_seed"] = seed
    return AnnealConfig.from_dict(data)


def _emit(report: dict, out: str | None) -> None:
    if out:
        harness.write_json(report, out)


def _parse_vector(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad input vector {text!r}") from None


def _parse_interval(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"bad interval {text!r}, expected lo:hi") from None
    return lo, hi


def target_function(expr: str, dim: int):
    """Vectorized callable from an expression in ``x1..xd`` and numpy names."""
    code = compile(expr, "<target>", "eval")
    allowed = set(_EXPR_NAMES) | {f"x{i + 1}" for i in range(dim)}
    unknown = set(code.co_names) - allowed
    if unknown:
        raise UsageError(f"unknown names in target expression: {sorted(unknown)}")

    def f(points):
        env = {f"x{i + 1}": points[:, i] for i in range(dim)}
        value = eval(code, {"__builtins__": {}, **_EXPR_NAMES}, env)
        return np.broadcast_to(np.asarray(value, dtype=float), (len(points),))

    return f


# ---------------------------------------------------------------- commands


def cmd_xor_demo(args) -> int:
    try:
        report = harness.run_xor_demo(args.ratio)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    labels = ["(1,1)", "(1,n)", "(n,1)", "(n,n)"]
    print(f"h/lambda = {args.ratio:g}, path difference = {report['path_difference']:.9f} lambda")
    for label, raw, norm, closed in zip(labels, report["raw"], report["normalized"],
                                        report["closed_form"]):
        print(f"{label:6s} raw={raw:.6e} normalized={norm:.6f} closed_form={closed:.6f}A")
    print(f"max deviation from XOR: {report['max_deviation']:.3e}")
    _emit(report, args.out)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_boolean_suite(args) -> int:
    config = _load_config(args.config, args.seed)
    report = harness.run_boolean_suite(config, args.restarts, args.tolerance,
                                       args.seed, args.jobs)
    for r in report["results"]:
        status = "ok" if r["success"] else "FAIL"
        print(f"f{r['function']:02d} targets={r['targets']} max_dev={r['max_deviation']:.4f} "
              f"restarts={r['restarts']} {status}")
    print(f"{report['passed']}/{report['total']} functions realized")
    _emit(report, args.out)
    return EXIT_OK if not report["failed"] else EXIT_FAIL


def cmd_train(args) -> int:
    model = harness.load_model(args.model)
    data = TrainingSet.read_csv(args.dataset)
    model, report = train(model, data, _load_config(args.config, args.seed))
    print(f"final error {report.final_error:.6e}, max deviation {report.max_deviation:.4f}, "
          f"{report.epochs} epochs, {report.stop_reason}")
    if args.out:
        harness.save_model(model, args.out)
    if args.report:
        harness.write_json(report.to_dict(), args.report)
    return EXIT_OK


def cmd_approximate(args) -> int:
    domain = RectDomain(tuple(_parse_interval(t) for t in args.domain))
    f = target_function(args.target, domain.dim)
    try:
        neuron, report = build(f, domain, args.epsilon, args.omega,
                               max_order=args.max_order, grid=args.resolution)
    except ApproximationError as exc:
        print(f"approximation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"order {report.order}, U = {report.U}, L = {report.L:.6g}, "
          f"sup error {report.sup_error:.3e} < {args.epsilon}")
    if args.out:
        harness.save_model(neuron, args.out)
    if args.report:
        harness.write_json(report.to_dict(), args.report)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = harness.load_model(args.model)
    if args.dataset:
        data = TrainingSet.read_csv(args.dataset)
        for x, y, t in zip(data.inputs, model.outputs(data.inputs), data.targets):
            print(",".join(f"{v:.12g}" for v in x) + f" -> {y:.12g} (target {t:.12g})")
        print(f"error {error_functional(model, data):.12g}, "
              f"max deviation {max_deviation(model, data):.12g}")
    elif args.input:
        for text in args.input:
            x = _parse_vector(text)
            print(",".join(f"{v:.12g}" for v in x) + f" -> {model.outputs([x])[0]:.12g}")
    else:
        raise UsageError("eval needs --dataset or --input")
    return EXIT_OK


def cmd_surface(args) -> int:
    model = harness.load_model(args.model)
    bounds = _parse_interval(args.range)
    try:
        grid = harness.export_surface(model, args.resolution, (bounds, bounds))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        grid.write_csv(args.out)
    if args.resolution >= 3:
        print(f"smoothness {harness.smoothness_metric(grid):.6f}")
    return EXIT_OK


def cmd_slm_train(args) -> int:
    if args.dataset:
        data = TrainingSet.read_csv(args.dataset)
    else:
        data = harness.boolean_dataset(args.function)
    config = _load_config(args.config, args.seed)
    result = harness.run_slm_training(data, config, args.restarts, args.tolerance,
                                      args.seed, args.nodes)
    print(f"max deviation {result.report.max_deviation:.4f} after {result.restarts} "
          f"restart(s), {'ok' if result.success else 'FAIL'}")
    if args.out:
        harness.save_model(result.model, args.out)
    if args.report:
        harness.write_json({**result.report.to_dict(), "restarts": result.restarts,
                            "success": result.success}, args.report)
    return EXIT_OK if result.success else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qneuron", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (falls back to $QNEURON_SEED, then 0)")
        return p

    p = add("xor-demo", cmd_xor_demo, "exact path sum of the tuned XOR double slit")
    p.add_argument("--ratio", type=float, default=1e4, help="h / lambda (>= 1000)")
    p.add_argument("--out", help="JSON report")

    p = add("boolean-suite", cmd_boolean_suite, "train all 16 two-input Boolean functions")
    p.add_argument("--config", help="anneal config JSON")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--tolerance", type=float, default=0.1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="JSON report")

    p = add("train", cmd_train, "anneal a saved model on a CSV dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--config", help="anneal config JSON")
    p.add_argument("--out", help="trained model JSON")
    p.add_argument("--report", help="training report JSON")

    p = add("approximate", cmd_approximate, "build a waveguide neuron for a target function")
    p.add_argument("--target", required=True,
                   help="expression in x1..xd, e.g. '((1+cos(2*pi*x1))/2)**2'")
    p.add_argument("--domain", nargs="+", default=["0:1"], metavar="LO:HI")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--omega", type=float, default=2 * np.pi)
    p.add_argument("--max-order", type=int, default=64)
    p.add_argument("--resolution", type=int, default=None,
                   help="validation points per dimension")
    p.add_argument("--out", help="neuron JSON")
    p.add_argument("--report", help="build report JSON")

    p = add("eval", cmd_eval, "evaluate a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset")
    p.add_argument("--input", nargs="+", metavar="X1,X2,...")

    p = add("surface", cmd_surface, "export a two-input model's output surface as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--resolution", type=int, default=101)
    p.add_argument("--range", default="1:1.67", metavar="LO:HI")
    p.add_argument("--out", help="surface CSV")

    p = add("slm-train", cmd_slm_train, "train the two-photon SLM neuron")
    p.add_argument("--dataset")
    p.add_argument("--function", type=int, default=6,
                   help="Boolean function code when no dataset is given (6 = XOR)")
    p.add_argument("--nodes", type=int, default=32)
    p.add_argument("--config", help="anneal config JSON")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--tolerance", type=float, default=0.1)
    p.add_argument("--out", help="trained model JSON")
    p.add_argument("--report", help="training report JSON")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.seed = harness.seed_from_env(args.seed)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        log.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
