"""Command-line front end.

    sublinear eval     --f max --n 3 --interval 0.3,0.7
    sublinear check    --f "2*mean" --target upper
    sublinear estimate --data samples.txt --phi x --group-size 100
    sublinear envelope --interval 0.3,0.7 --groups 9 --group-size 100 --seed 1
    sublinear lln      --family bernoulli:0.3 --family bernoulli:0.7 --N 100,1000,10000 --seed 1

Exit codes: 0 success (or unbiased), 1 biased, 2 usage/config error,
3 inconclusive at budget.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import estimators as est
from .boxmax import Box, box_maximize
from .config import ConfigError, ExperimentConfig
from .expr import ExpressionError, parse_function
from .functions import TestFunction
from .grouped import block_envelope, envelope_estimator, grid_sweep_policies, maximal_group_stream
from .lln import lln_convergence
from .maximal import MaximalDistribution
from .policies import constant_policies
from .scenarios import parse_family

EXIT_OK = 0
EXIT_BIASED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3

_DEFAULT_CHECK_N = (1, 2, 3, 4, 5)


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _fmt_vec(v) -> str:
    return " ".join(repr(float(a)) for a in np.ravel(v))


def _write(cfg: ExperimentConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(cfg: ExperimentConfig, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header) + ["config_hash"])
    for r in rows:
        w.writerow([_fmt(x) for x in r] + [cfg.hash])
    return buf.getvalue()


def _function(field: str, text: str | None, n: int | None) -> TestFunction:
    if text is None:
        raise ConfigError(field, "is required")
    try:
        return parse_function(text, n)
    except ExpressionError as exc:
        raise ConfigError(field, str(exc)) from None


def _min_arity(text: str) -> int:
    try:
        return parse_function(text).arity
    except ExpressionError:
        return 1


def read_samples(path: str) -> np.ndarray:
    """One real per line; blank lines and ``#`` comments are ignored."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError("data", f"file not found: {path}")
    values = []
    for lineno, line in enumerate(p.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ConfigError("data", f"line {lineno}: not a number: {line!r}") from None
    if not values:
        raise ConfigError("data", f"no samples in {path}")
    return np.asarray(values)


def cmd_eval(cfg: ExperimentConfig) -> int:
    if cfg.interval is None:
        raise ConfigError("interval", "is required")
    if cfg.n is not None and len(cfg.n) != 1:
        raise ConfigError("n", "eval takes a single arity")
    n = cfg.n[0] if cfg.n else None
    f = _function("f", cfg.f, n)
    lo, hi = cfg.interval
    box = Box(lo, hi, f.arity)
    up = box_maximize(f, box, cfg.tol, cfg.budget)
    down = box_maximize(-f, box, cfg.tol, cfg.budget)
    header = ["f", "n", "mu_lower", "mu_upper", "value", "lower_value", "argmax", "certificate_gap", "evaluations", "warning"]
    row = [cfg.f, f.arity, lo, hi, up.value, -down.value, _fmt_vec(up.argmax), up.certificate_gap,
           up.evaluations + down.evaluations, up.warning or down.warning or ""]
    _write(cfg, _csv(cfg, header, [row]))
    return EXIT_OK


def cmd_check(cfg: ExperimentConfig) -> int:
    if cfg.f is None:
        raise ConfigError("f", "is required")
    arities = cfg.n if cfg.n else tuple(k for k in _DEFAULT_CHECK_N if k >= _min_arity(cfg.f))
    if not arities:
        raise ConfigError("n", f"no default arity fits {cfg.f!r}; pass --n")
    target = "upper_mean" if cfg.target == "upper" else "lower_mean"
    results, verdicts = [], []
    for n in arities:
        f = _function("f", cfg.f, n)
        v = est.check_unbiased(f, n, target, cfg.grid, cfg.tol, cfg.budget)
        verdicts.append(v.verdict)
        results.append({"n": n, **v.to_dict()})
    if est.BIASED in verdicts:
        overall, code = est.BIASED, EXIT_BIASED
    elif est.INCONCLUSIVE in verdicts:
        overall, code = est.INCONCLUSIVE, EXIT_INCONCLUSIVE
    else:
        overall, code = est.UNBIASED, EXIT_OK
    record = {"config_hash": cfg.hash, "f": cfg.f, "target": target, "verdict": overall, "results": results}
    _write(cfg, json.dumps(record, indent=2, sort_keys=True) + "\n")
    return code


def cmd_estimate(cfg: ExperimentConfig) -> int:
    if cfg.data is None:
        raise ConfigError("data", "is required")
    x = read_samples(cfg.data)
    n = cfg.group_size if cfg.group_size is not None else max(1, int(np.sqrt(x.size)))
    if x.size < n:
        raise ConfigError("data", f"{x.size} samples is fewer than group size {n}")
    lo, hi = est.estimate_interval(x)
    header = ["phi", "N", "min", "max", "group_size", "groups", "upper_envelope", "lower_envelope", "dropped"]
    rows = []
    for text in cfg.phi:
        phi = _function("phi", text, 1)
        g = block_envelope(x, phi, n)
        rows.append([text, x.size, lo, hi, n, g.group_count, g.upper_envelope, g.lower_envelope, g.dropped])
    _write(cfg, _csv(cfg, header, rows))
    return EXIT_OK


def cmd_envelope(cfg: ExperimentConfig) -> int:
    if cfg.group_size is None:
        raise ConfigError("group_size", "is required")
    if cfg.groups is None:
        raise ConfigError("groups", "is required")
    n, k = cfg.group_size, cfg.groups
    if cfg.data is not None:
        x = read_samples(cfg.data)
        source = cfg.data
    else:
        if cfg.interval is None:
            raise ConfigError("interval", "is required when no --data is given")
        M = MaximalDistribution(*cfg.interval)
        x = maximal_group_stream(M, grid_sweep_policies(M, k), n, k, cfg.seed)
        source = f"maximal[{cfg.interval[0]!r},{cfg.interval[1]!r}]"
    header = ["phi", "source", "group_size", "groups", "upper_envelope", "lower_envelope", "group_means"]
    rows = []
    for text in cfg.phi:
        phi = _function("phi", text, 1)
        try:
            g = envelope_estimator(x, phi, k, n)
        except ValueError as exc:
            raise ConfigError("data", str(exc)) from None
        rows.append([text, source, n, k, g.upper_envelope, g.lower_envelope, _fmt_vec(g.group_means)])
    _write(cfg, _csv(cfg, header, rows))
    return EXIT_OK


def cmd_lln(cfg: ExperimentConfig) -> int:
    if not cfg.family:
        raise ConfigError("family", "at least one --family scenario is required")
    if not cfg.n_schedule:
        raise ConfigError("n_schedule", "is required")
    try:
        fam = parse_family(cfg.family)
    except ValueError as exc:
        raise ConfigError("family", str(exc)) from None
    header = ["phi", "N", "estimate", "reference", "gap", "std_error", "policy"]
    rows, curves = [], {}
    for text in cfg.phi:
        phi = _function("phi", text, 1)
        pols = constant_policies(len(fam)) if cfg.policies == "constant" else None
        out = lln_convergence(fam, phi, cfg.n_schedule, cfg.replications, cfg.seed, pols, threads=cfg.threads)
        curves[text] = out
        rows.extend([text, r.N, r.estimate, r.reference, r.gap, r.std_error, r.policy] for r in out)
    _write(cfg, _csv(cfg, header, rows))
    if cfg.plot:
        _plot_gaps(cfg, curves)
    return EXIT_OK


def _plot_gaps(cfg: ExperimentConfig, curves) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = cfg.hash
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, rows in curves.items():
        gaps = [max(r.gap, 1e-16) for r in rows]
        ax.loglog([r.N for r in rows], gaps, marker="o", label=label)
    ax.set_xlabel("N")
    ax.set_ylabel("|estimate - reference|")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(cfg.plot, format="svg", metadata={"Date": None})
    plt.close(fig)


COMMAND_FUNCS = {
    "eval": cmd_eval,
    "check": cmd_check,
    "estimate": cmd_estimate,
    "envelope": cmd_envelope,
    "lln": cmd_lln,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(float(p)) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text: str) -> list[list[float]]:
    # "lo:hi;lo:hi;..."
    out = []
    for item in text.split(";"):
        if not item.strip():
            continue
        a, sep, b = item.partition(":")
        try:
            out.append([float(a), float(b)])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid entry {item!r}; use 'lo:hi;lo:hi'") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--tol", type=float, default=None, help="value tolerance (default 1e-6)")
    g.add_argument("--budget", type=int, default=None, help="evaluations per optimization (default 1e5)")
    g.add_argument("--threads", type=int, default=None)
    g.add_argument("--config", default=None, help="JSON config file; flags override its fields")
    g.add_argument("--out", default=None, help="output path (default stdout)")

    parser = _Parser(prog="sublinear", description="Estimation under sublinear expectation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="exact E[f(X_1..X_n)] for a maximal i.i.d. sample")
    p.add_argument("--f", dest="f")
    p.add_argument("--n", type=_ints)
    p.add_argument("--interval", type=_pair)

    p = sub.add_parser("check", parents=[common], help="unbiasedness verdict for an estimator")
    p.add_argument("--f", dest="f")
    p.add_argument("--n", type=_ints, help="arities to test (default 1..5)")
    p.add_argument("--target", choices=["upper", "lower"])
    p.add_argument("--grid", type=_grid, help="parameter pairs 'lo:hi;lo:hi;...'")

    p = sub.add_parser("estimate", parents=[common], help="interval and block envelopes from a data file")
    p.add_argument("--data")
    p.add_argument("--phi", action="append")
    p.add_argument("--group-size", dest="group_size", type=int)

    p = sub.add_parser("envelope", parents=[common], help="triangle-order envelope estimator")
    p.add_argument("--data")
    p.add_argument("--interval", type=_pair, help="simulate a maximal sample on this interval")
    p.add_argument("--phi", action="append")
    p.add_argument("--groups", type=int)
    p.add_argument("--group-size", dest="group_size", type=int)

    p = sub.add_parser("lln", parents=[common], help="law of large numbers convergence table")
    p.add_argument("--family", action="append", help="scenario spec, e.g. bernoulli:0.3 (repeatable)")
    p.add_argument("--phi", action="append")
    p.add_argument("--N", dest="n_schedule", type=_ints)
    p.add_argument("--replications", type=int)
    p.add_argument("--policies", choices=["constant", "default"])
    p.add_argument("--plot", help="SVG plot of gap against N")
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    base: dict = {}
    if ns.config:
        path = Path(ns.config)
        if not path.is_file():
            raise ConfigError("config", f"file not found: {ns.config}")
        base = ExperimentConfig.from_json(path.read_text()).to_dict()
        if base.get("command") != ns.command:
            raise ConfigError("command", f"config file is for '{base.get('command')}', not '{ns.command}'")
    flags = {k: v for k, v in vars(ns).items() if k != "config" and v is not None}
    return ExperimentConfig.from_dict({**base, **flags})


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        cfg = config_from_args(ns)
        return COMMAND_FUNCS[cfg.command](cfg)
    except UsageError as exc:
        print(f"sublinear: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"sublinear: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"sublinear: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
