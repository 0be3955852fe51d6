"""Command-line interface: ``geninfo <subcommand> [config.yaml] [options]``.

Exit codes: 0 success, 2 parse error, 3 validation error, 4 solver
non-convergence (results are still written). Diagnostics go to stderr only.
"""
from __future__ import annotations

import argparse
import sys
from importlib import resources

import numpy as np
import yaml

from .config import ConfigError, Problem, Violation, load_document, parse_config, parse_s_grid
from .core_prob import Alphabet
from .entropies import SemanticSystem, all_quantities
from .errors import GeninfoError, MatchingPointOutsideSweepError
from .experiments import (
    REFERENCE_BITS,
    PLATEAU_TOL,
    GrayLevelConfig,
    default_s_grid,
    fig4_csv,
    fig4_family,
    fig5_csv,
    fig5_study,
    stock_csv,
    stock_info_curves,
)
from .rate_fidelity import payoff_matrix, rate_distortion_curve, rate_fidelity_curve
from .semantic import (
    generalized_cond_entropy,
    generalized_kullback,
    select_best,
    semantic_info,
    translate_select,
)
from .tabular import csv_text, fields_text, fmt

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3, 4

SUBCOMMANDS = ("info", "kullback", "select", "translate", "entropies",
               "rate-fidelity", "rate-distortion", "experiment")
EXPERIMENTS = ("fig2", "fig4", "fig5")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", "-o", help="write results here instead of stdout")
    common.add_argument("--epsilon", type=float, help="truth-degree clamp")
    common.add_argument("--max-iter", type=int, dest="max_iter", help="solver iteration cap")
    common.add_argument("--s-grid", dest="s_grid", help='slope grid as "start:stop:count"')
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (dotted paths allowed)")

    parser = _Parser(prog="geninfo", description="Generalized information measures and R(G).")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS[:-1]:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("config", help="YAML config document")
        if name == "rate-fidelity":
            p.add_argument("--channels", help="also write every solved channel to this YAML file")
    exp = sub.add_parser("experiment", parents=[common])
    exp.add_argument("name", choices=EXPERIMENTS)
    exp.add_argument("--config", help="use this document instead of the bundled preset")
    exp.add_argument("--d", type=float, action="append", help="discrimination width (repeatable)")
    exp.add_argument("--k", type=int, help="bit depth (fig4)")
    exp.add_argument("--kmin", type=int)
    exp.add_argument("--kmax", type=int)
    exp.add_argument("--workers", type=int, default=1)
    return parser


def _apply_set(doc: dict, item: str):
    if "=" not in item:
        raise ConfigError([Violation(item, "override must look like key=value")])
    key, raw = item.split("=", 1)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        raise ConfigError([Violation(key, f"cannot parse override value {raw!r}")]) from None
    node = doc
    parts = key.strip().split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError([Violation(key, "override path crosses a non-mapping")])
    node[parts[-1]] = value


def _read_document(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([Violation(path, f"cannot read config: {exc.strerror}")]) from None
    return load_document(text)


def _preset(name: str) -> dict:
    text = resources.files("geninfo").joinpath("presets", f"{name}.yaml").read_text(encoding="utf-8")
    return load_document(text)


def _overrides(doc: dict, args) -> dict:
    for item in args.set:
        _apply_set(doc, item)
    if args.epsilon is not None:
        doc["epsilon"] = args.epsilon
    if args.max_iter is not None:
        doc["max_iterations"] = args.max_iter
    if args.s_grid is not None:
        doc["s_grid"] = args.s_grid
    return doc


def _s_grid(prob: Problem) -> np.ndarray:
    return default_s_grid() if prob.s_grid is None else prob.s_grid


def _labels(prob: Problem, n: int):
    return (prob.alphabet or Alphabet.of_size(n)).labels


# each handler returns (text, converged[, points])

def _cmd_info(prob: Problem):
    n = len(prob.prior)
    labels = _labels(prob, n)
    events = range(n) if prob.event is None else [prob.event]
    rows = [(i, labels[i], semantic_info(prob.prior, prob.truth, i)) for i in events]
    return csv_text(["event", "label", "info_bits"], rows), True


def _cmd_kullback(prob: Problem):
    fields = {
        "kullback_bits": generalized_kullback(prob.evidence, prob.prior, prob.truth, prob.epsilon),
        "cond_entropy_bits": generalized_cond_entropy(prob.evidence, prob.prior, prob.truth, prob.epsilon),
    }
    return fields_text(fields), True


def _selection_text(index, scores):
    return f"selected={index}\n" + csv_text(["index", "score_bits"], enumerate(scores))


def _cmd_select(prob: Problem):
    return _selection_text(*select_best(prob.messages, prob.evidence, prob.prior, prob.epsilon)), True


def _cmd_translate(prob: Problem):
    return _selection_text(*translate_select(prob.source_truth, prob.prior, prob.messages, prob.epsilon)), True


def _cmd_entropies(prob: Problem):
    forecast = prob.forecast if prob.forecast is not None else prob.prior
    system = SemanticSystem(prob.prior, forecast, prob.channel, prob.messages, prob.epsilon)
    return fields_text(all_quantities(system)), True


def _cmd_rate_fidelity(prob: Problem):
    if prob.graylevel is not None:
        source, payoff = prob.graylevel.build(prob.epsilon)
    else:
        source, payoff = prob.prior, payoff_matrix(prob.prior, prob.messages, prob.epsilon)
    points = rate_fidelity_curve(source, payoff, _s_grid(prob), max_iter=prob.max_iterations)
    rows = [(p.s, p.R, p.G, p.converged, p.iterations) for p in points]
    text = csv_text(["s", "R_bits", "G_bits", "converged", "iterations"], rows)
    return text, all(p.converged for p in points), points


def channel_document(points) -> str:
    """Solved channels as YAML, one row-major matrix per slope."""
    def num(v):
        return float(fmt(v))

    doc = [{"s": num(p.s), "output": [num(v) for v in p.output],
            "channel": [[num(v) for v in row] for row in np.asarray(p.channel)]} for p in points]
    return yaml.safe_dump({"points": doc}, sort_keys=False, default_flow_style=None)


def _cmd_rate_distortion(prob: Problem):
    points = rate_distortion_curve(prob.prior, prob.distortion, _s_grid(prob), max_iter=prob.max_iterations)
    rows = [(p.s, p.R, p.D, p.converged, p.iterations) for p in points]
    text = csv_text(["s", "R_bits", "D", "converged", "iterations"], rows)
    return text, all(p.converged for p in points)


REQUIRED = {
    "info": ("prior", "truth"),
    "kullback": ("prior", "evidence", "truth"),
    "select": ("prior", "evidence", "messages"),
    "translate": ("prior", "source_truth", "messages"),
    "entropies": ("prior", "channel", "messages"),
    "rate-distortion": ("prior", "distortion"),
}

HANDLERS = {
    "info": _cmd_info,
    "kullback": _cmd_kullback,
    "select": _cmd_select,
    "translate": _cmd_translate,
    "entropies": _cmd_entropies,
    "rate-fidelity": _cmd_rate_fidelity,
    "rate-distortion": _cmd_rate_distortion,
}


def _rate_fidelity_required(doc: dict):
    return () if "graylevel" in doc else ("prior", "messages")


def _d_list(doc, args):
    if args.d:
        return list(args.d)
    d = doc.get("d")
    if d is None:
        raise ConfigError([Violation("d", "required for this experiment")])
    return [d] if isinstance(d, (int, float)) else list(d)


def _number(doc, key, kind, default):
    val = doc.get(key, default)
    if val is not None and not isinstance(val, (int, float)):
        raise ConfigError([Violation(key, f"expected a number, got {val!r}")])
    return None if val is None else kind(val)


def _experiment(args, doc: dict):
    name = args.name
    if name == "fig2":
        prob = parse_config(doc, required=("stock",))
        return stock_csv(stock_info_curves(prob.stock)), True

    ref = doc.get("reference_bits", REFERENCE_BITS)
    d_values = _d_list(doc, args)
    if name == "fig4":
        k = args.k if args.k is not None else _number(doc, "k", int, None)
        if k is None:
            raise ConfigError([Violation("k", "required for fig4")])
        grid = default_s_grid() if "s_grid" not in doc else _grid_or_fail(doc["s_grid"])
        configs = [GrayLevelConfig(k, d, tuple(grid), ref) for d in d_values]
        curves = fig4_family(configs, workers=args.workers)
        ok = all(p.converged for c in curves for p in c.points)
        return fig4_csv(curves), ok

    krange = doc.get("k") or {}
    if not isinstance(krange, dict):
        raise ConfigError([Violation("k", "expected {min, max}")])
    kmin = args.kmin if args.kmin is not None else int(krange.get("min", 1))
    kmax = args.kmax if args.kmax is not None else int(krange.get("max", 8))
    tol = _number(doc, "plateau_tol", float, PLATEAU_TOL)
    results = [fig5_study(d, range(kmin, kmax + 1), workers=args.workers,
                          reference_bits=ref, plateau_tol=tol) for d in d_values]
    return fig5_csv(results), True


def _grid_or_fail(spec):
    try:
        return parse_s_grid(spec)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError([Violation("s_grid", str(exc), "invalid")]) from None


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"geninfo: usage error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        if args.subcommand == "experiment":
            doc = _read_document(args.config) if args.config else _preset(args.name)
            doc = _overrides(doc, args)
            text, ok = _experiment(args, doc)
        else:
            doc = _overrides(_read_document(args.config), args)
            required = (_rate_fidelity_required(doc) if args.subcommand == "rate-fidelity"
                        else REQUIRED[args.subcommand])
            prob = parse_config(doc, required=required)
            text, ok, *extra = HANDLERS[args.subcommand](prob)
            if extra and args.channels:
                _emit(channel_document(extra[0]), args.channels)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"geninfo: {v}", file=sys.stderr)
        return exc.exit_code
    except MatchingPointOutsideSweepError as exc:
        print(f"geninfo: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except GeninfoError as exc:
        print(f"geninfo: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(text, args.output)
    if not ok:
        print("geninfo: warning: some points did not converge (see the converged column)",
              file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
