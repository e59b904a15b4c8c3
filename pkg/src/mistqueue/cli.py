"""Command line: generate traces, run policies, sweep one parameter, tabulate bounds.

    mistqueue generate --traces 10 --out traces/
    mistqueue run --policy sam,sao-effect --traces 100 --out run.csv
    mistqueue sweep --sweep r --grid 0,0.25,0.5,0.75,1 --alpha 1 --out r.csv
    mistqueue bounds --V 1,2,4 --W 2,4,8 --M 1-64 --out bounds.csv

Every command accepts ``--config FILE`` with ``key=value`` lines named
after the long flags; flags given on the command line win.  Exit status is
0 on success, 2 for bad flags or settings and 3 for I/O problems.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import bounds as bl
from .experiments import (DEFAULT_GRIDS, REGIME_CHOICES, ROW_FIELDS, SWEEP_PARAMS, Row, Setup, evaluate,
                          make_traces, summarize, sweep, trace_seed)
from .policies import POLICY_NAMES
from .traceio import TraceFormatError, load, save
from .traffic import TrafficConfig

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3
SEED_ENV = "MISTQUEUE_SEED"
SUMMARY_FIELDS = ("algorithm", "mean_ratio", "std_ratio", "mean_throughput", "n")
BOUND_FIELDS = ("V", "W", "w", "M", "p_star", "bound", "region", "check")


class UsageError(Exception):
    pass


# -- value parsing -----------------------------------------------------------

def int_list(text: str) -> List[int]:
    """``1,2,4`` or ``1-64`` (inclusive) or a mix such as ``1-4,8``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part[1:]:
                lo, hi = part[0] + part[1:].split("-", 1)[0], part[1:].split("-", 1)[1]
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return out


def float_list(text: str) -> List[float]:
    """``0,0.25,1``; integer ranges such as ``1-8`` expand as in :func:`int_list`."""
    vals: List[float] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            vals.append(float(part))
        except ValueError:
            vals.extend(float(v) for v in int_list(part))
    if not vals:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return vals


RANDOM = "random"


def class_index(text: str):
    if str(text).lower() == RANDOM:
        return RANDOM
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'random', got {text!r}") from None


def policy_list(text: str) -> List[str]:
    names = [p.strip().lower() for p in str(text).split(",") if p.strip()]
    bad = [n for n in names if n not in POLICY_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown policy {','.join(bad) or text!r}; "
                                         f"choose from {', '.join(POLICY_NAMES)}")
    return names


def read_config(path: str) -> Dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment; keys use flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _as_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


# -- parser ------------------------------------------------------------------

def _traffic_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("traffic")
    g.add_argument("--W", type=int, default=256, help="maximum work (power of two)")
    g.add_argument("--V", type=int, default=16, help="maximum profit (power of two)")
    g.add_argument("--alpha", type=float, default=0.3, help="probability a packet is unknown")
    g.add_argument("--packets", type=int, default=10_000, help="packets per trace")
    g.add_argument("--traces", type=int, default=1, help="number of traces")
    g.add_argument("--lambda-high", type=float, default=10.0)
    g.add_argument("--lambda-low", type=float, default=0.5)
    g.add_argument("--mean-high", type=float, default=10.0, help="mean HIGH sojourn in cycles")
    g.add_argument("--seed", type=int, default=None, help=f"master seed (falls back to ${SEED_ENV}, then 0)")


def _policy_flags(p: argparse.ArgumentParser, policies_default: str) -> None:
    g = p.add_argument_group("policies")
    g.add_argument("--policy", type=policy_list, default=policy_list(policies_default),
                   help=f"comma list of {'|'.join(POLICY_NAMES)}")
    g.add_argument("--B", type=int, default=10, help="buffer size")
    g.add_argument("--r", type=float, default=1.0, help="admittance probability")
    g.add_argument("--i-star", type=class_index, default=None,
                   help="work-class, or w* for small sets, or 'random' (default 3)")
    g.add_argument("--j-star", type=class_index, default=None,
                   help="profit-class, or v* for small sets, or 'random' (default 3)")
    g.add_argument("--regime", choices=REGIME_CHOICES, default=None,
                   help="class regime; default is each policy's own")
    g.add_argument("--work-values", type=int_list, default=None, help="work value set for small-sets")
    g.add_argument("--profit-values", type=int_list, default=None, help="profit value set for small-sets")
    g.add_argument("--batch-sort", action="store_true", help="sort once per arrival batch")
    g.add_argument("--workers", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mistqueue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write synthetic traces")
    g.add_argument("--config")
    _traffic_flags(g)
    g.add_argument("--out", required=True, help="output directory")

    r = sub.add_parser("run", help="run policies over traces and write per-run rows")
    r.add_argument("--config")
    _traffic_flags(r)
    _policy_flags(r, "fifo,sam,sao-fifo,sao-wtv,sao-effect")
    r.add_argument("--input", nargs="+", default=None, help="trace files or directories (skips generation)")
    r.add_argument("--out", default="-", help="CSV path or - for stdout")
    r.add_argument("--plot", action="store_true", help="also write a bar chart next to --out")

    s = sub.add_parser("sweep", help="vary one of i*, j*, alpha, r")
    s.add_argument("--config")
    _traffic_flags(s)
    _policy_flags(s, "fifo,sam,sao-fifo,sao-wtv,sao-effect")
    s.add_argument("--sweep", required=True, choices=SWEEP_PARAMS + ("i-star", "j-star"))
    s.add_argument("--grid", type=float_list, default=None, help="comma list of values (default per parameter)")
    s.add_argument("--out", default="-", help="CSV path or - for stdout")
    s.add_argument("--no-plot", action="store_true", help="skip the figure written next to --out")

    b = sub.add_parser("bounds", help="tabulate the lower bound and its region checks")
    b.add_argument("--config")
    b.add_argument("--V", type=int_list, default=int_list("1,2,4,8,16"))
    b.add_argument("--W", type=int_list, default=int_list("2,4,8,16,32,64,128,256"))
    b.add_argument("--w", type=int_list, default=None, help="minimum work values (default {1, W/2, W})")
    b.add_argument("--w-mode", choices=("thirds", "all"), default="thirds")
    b.add_argument("--M", type=int_list, default=int_list("1-64"))
    b.add_argument("--subopt", type=int, default=0, metavar="N",
                   help="also simulate SubOPT on adversarial traces with N fill cycles")
    b.add_argument("--subopt-seeds", type=int, default=20)
    b.add_argument("--B", type=int, default=2)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out", default="-")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    ns = parser.parse_args(argv)
    if getattr(ns, "config", None):
        try:
            values = read_config(ns.config)
        except OSError as exc:
            raise OSError(f"cannot read config {ns.config}: {exc.strerror}") from exc
        subparser = parser._subparsers._group_actions[0].choices[ns.command]
        known = {a.dest: a for a in subparser._actions}
        defaults = {}
        for key, value in values.items():
            if key not in known or key in ("help", "config"):
                raise UsageError(f"unknown config key {key!r}")
            action = known[key]
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                defaults[key] = _as_bool(value)
            else:
                defaults[key] = value
        subparser.set_defaults(**defaults)
        ns = parser.parse_args(argv)
    return ns


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"${SEED_ENV} is not an integer: {env!r}") from None


# -- commands ----------------------------------------------------------------

def traffic_config(ns: argparse.Namespace) -> TrafficConfig:
    cfg = TrafficConfig(lambda_high=ns.lambda_high, lambda_low=ns.lambda_low, mean_high_duration=ns.mean_high,
                        alpha=ns.alpha, W=ns.W, V=ns.V, total_packets=ns.packets)
    cfg.validate()
    if ns.traces < 0:
        raise ValueError("--traces must be nonnegative")
    return cfg


def _class_value(value):
    if value is None:
        return 3
    return None if value == RANDOM else value


def setup_from(ns: argparse.Namespace) -> Setup:
    setup = Setup(policies=tuple(ns.policy), B=ns.B, r=ns.r,
                  i_star=_class_value(ns.i_star), j_star=_class_value(ns.j_star),
                  regime=ns.regime, work_values=tuple(ns.work_values or ()),
                  profit_values=tuple(ns.profit_values or ()), batch_sort=ns.batch_sort)
    setup.validate()
    if ns.B < 2:
        raise ValueError("--B must be at least 2")
    if not 0.0 <= ns.r <= 1.0:
        raise ValueError("--r must lie in [0, 1]")
    if ns.workers < 1:
        raise ValueError("--workers must be at least 1")
    return setup


def cmd_generate(ns: argparse.Namespace, stdout) -> int:
    cfg = traffic_config(ns)
    seed = resolve_seed(ns.seed)
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    w = csv.writer(stdout, lineterminator="\n")
    w.writerow(("path", "seed", "packets", "unknown", "cycles"))
    for k, trace in enumerate(make_traces(cfg, ns.traces, seed)):
        path = out / f"trace_{k:04d}.trace"
        save(trace, path)
        unknown = sum(1 for a in trace.arrivals() if not a.known)
        w.writerow((str(path), trace.seed, trace.num_packets, unknown,
                    0 if not trace.batches else trace.last_cycle + 1))
    return EXIT_OK


def _collect_inputs(paths: Sequence[str]) -> List[Path]:
    files: List[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.suffix == ".trace"))
        elif p.exists():
            files.append(p)
        else:
            raise FileNotFoundError(f"no such trace file or directory: {p}")
    if not files:
        raise FileNotFoundError("no .trace files found in --input")
    return files


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.6f}" if not value.is_integer() else f"{value:.1f}"
    return str(value)


def write_rows(rows: Sequence[Row], sink, lead: Sequence[str] = (), summary: bool = True) -> None:
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(tuple(lead) + ROW_FIELDS)
    for row in rows:
        w.writerow([_fmt(row.extra.get(k)) for k in lead] + [_fmt(v) for v in row.values()])
    if summary:
        for s in summarize(rows):
            w.writerow(("#summary",) + tuple(f"{f}={_fmt(getattr(s, f))}" for f in SUMMARY_FIELDS))


def _open_out(path: str, stdout):
    if path == "-":
        return stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline=""), True


def cmd_run(ns: argparse.Namespace, stdout) -> int:
    setup = setup_from(ns)
    if ns.input:
        traces = [load(p) for p in _collect_inputs(ns.input)]
        for t in traces:
            t.validate()
    else:
        traces = make_traces(traffic_config(ns), ns.traces, resolve_seed(ns.seed))
    rows = evaluate(traces, setup, ns.workers)
    sink, close = _open_out(ns.out, stdout)
    try:
        write_rows(rows, sink)
    finally:
        if close:
            sink.close()
    if ns.plot and ns.out != "-" and rows:
        from .plotting import plot_summary
        plot_summary(rows, Path(ns.out).with_suffix(".png"))
    return EXIT_OK


def cmd_sweep(ns: argparse.Namespace, stdout) -> int:
    param = ns.sweep.replace("-", "_")
    setup = setup_from(ns)
    grid = ns.grid if ns.grid is not None else DEFAULT_GRIDS[param]
    if param in ("i_star", "j_star"):
        grid = [int(v) for v in grid]
        if any(float(v) != int(v) for v in (ns.grid or [])):
            raise ValueError("class sweeps need integer grid values")
    if param == "alpha" and any(not 0 <= v <= 1 for v in grid):
        raise ValueError("alpha grid values must lie in [0, 1]")
    if param == "r" and any(not 0 <= v <= 1 for v in grid):
        raise ValueError("r grid values must lie in [0, 1]")
    traffic = traffic_config(ns)
    # a class sweep holds the other class at its own default unless given
    other = {"i_star": ns.j_star, "j_star": ns.i_star}.get(param)
    companion = other if isinstance(other, int) else None
    rows = sweep(param, grid, traffic, setup, ns.traces, resolve_seed(ns.seed), ns.workers, companion)
    sink, close = _open_out(ns.out, stdout)
    try:
        write_rows(rows, sink, lead=("value",), summary=False)
    finally:
        if close:
            sink.close()
    if not ns.no_plot and ns.out != "-" and rows:
        from .plotting import plot_sweep
        plot_sweep(rows, param, Path(ns.out).with_suffix(".png"))
    return EXIT_OK


def cmd_bounds(ns: argparse.Namespace, stdout) -> int:
    if any(v < 1 for v in ns.V) or any(w < 2 for w in ns.W) or any(m < 1 for m in ns.M):
        raise ValueError("need V >= 1, W >= 2, M >= 1")
    sink, close = _open_out(ns.out, stdout)
    try:
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(BOUND_FIELDS)
        for row in bl.bound_grid(ns.V, ns.W, ns.w, ns.M, ns.w_mode):
            check = "" if row.check is None else str(row.check).lower()
            w.writerow((row.V, row.W, row.w, row.M, _fmt_sci(row.p_star), _fmt_sci(row.bound), row.region, check))
        if ns.subopt > 0:
            seed = resolve_seed(ns.seed)
            w.writerow(("#subopt", "V", "W", "w", "M", "N", "seeds", "mean", "stderr", "expected"))
            for V in ns.V:
                for W in ns.W:
                    for wmin in sorted({1, max(1, W // 2), W}) if ns.w is None else ns.w:
                        for M in ns.M:
                            params = bl.BoundParams(V, W, wmin, M)
                            if params.degenerate or wmin > W:
                                continue
                            vals = [bl.subopt_run(bl.adversarial_trace(
                                params, ns.subopt, ns.B, np.random.default_rng(trace_seed(seed, k))), params, ns.B)
                                for k in range(ns.subopt_seeds)]
                            mean = float(np.mean(vals))
                            se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
                            w.writerow(("#subopt", V, W, wmin, M, ns.subopt, ns.subopt_seeds, _fmt_sci(mean),
                                        _fmt_sci(se), _fmt_sci(bl.subopt_expectation(params, ns.subopt))))
    finally:
        if close:
            sink.close()
    return EXIT_OK


def _fmt_sci(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.12g}"


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "sweep": cmd_sweep, "bounds": cmd_bounds}


def main(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        ns = parse_args(argv)
        return COMMANDS[ns.command](ns, stdout)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except TraceFormatError as exc:
        print(f"mistqueue: bad trace: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"mistqueue: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, ValueError) as exc:
        print(f"mistqueue: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
