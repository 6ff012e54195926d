"""``frogtree`` command line.

Subcommands: bounds, moments, simulate, couple, sweep, vt.  Every
subcommand accepts ``--config FILE`` with ``key = value`` lines (``#``
starts a comment); flags given on the command line win over the file.
CSV output starts with ``#`` lines echoing the version and the resolved
configuration.  JSON reports carry ``schema_version`` and the same
configuration under ``"config"``.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bounds import (MOMENT_COLUMNS, Base, compute_moment_sequences, critical_rho,
                     pa_lower_bound, q_star, sample_rde)
from .core.tree import DomainError, ModelParams, p_of_rho
from .fm import ConfigError, SimConfig, Truncation, summarize
from .runner import FM_COLUMNS, MODELS, RFM_COLUMNS, header_lines, outcome_row, run_model_trials, write_csv

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VIOLATION = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------------ config

def read_config_file(path: str) -> dict[str, str]:
    """``key = value`` pairs; dashes in keys are read as underscores."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise UsageError(f"{path}:{n}: empty key")
            out[key.replace("-", "_")] = value
    return out


def _apply_config(parser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in parser._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, raw in values.items():
        if key not in actions:
            raise UsageError(f"unknown config key {key!r}")
        act = actions[key]
        try:
            value = act.type(raw) if act.type is not None else raw
        except (TypeError, ValueError):
            raise UsageError(f"bad value for {key!r}: {raw!r}") from None
        if act.choices is not None and value not in act.choices:
            raise UsageError(f"{key!r} must be one of {list(act.choices)}")
        defaults[key] = value
    parser.set_defaults(**defaults)


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _on_off(s: str) -> bool:
    s = s.strip().lower()
    if s in ("on", "true", "yes", "1"):
        return True
    if s in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on or off, got {s!r}")


# ------------------------------------------------------------------ output

@contextlib.contextmanager
def _sink(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as e:
        raise _IOFailure(f"cannot write {path}: {e.strerror}") from None
    with fh:
        yield fh


class _IOFailure(Exception):
    pass


def _resolved(args: argparse.Namespace, skip=("func", "config", "command")) -> dict:
    out = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        if isinstance(v, list):
            v = ",".join(str(x) for x in v)
        out[k] = v
    return out


def _json_doc(command: str, args, body: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "frogtree_version": __version__,
            "command": command, "config": _resolved(args), **body}


def _write_json(path: Optional[str], doc: dict) -> None:
    with _sink(path) as fh:
        json.dump(doc, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, tuple):
        return list(o)
    return str(o)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


# ------------------------------------------------------------------ bounds

def cmd_bounds(args) -> int:
    if args.T < 1:
        raise UsageError("--T must be at least 1")
    res = critical_rho(args.T, args.tol, args.grid)
    qs = q_star()
    table = []
    for t in range(1, args.T + 1):
        pa = pa_lower_bound(t, res.rho_star) if res.found else None
        rt = critical_rho(t, args.tol, args.grid).rho_star if args.per_t else None
        table.append((t, pa, rt))
    if args.json:
        body = {"result": res.as_dict(), "q_star": qs, "found": res.found,
                "table": [{"t": t, "pa_lb": pa, "rho_star_t": rt} for t, pa, rt in table]}
        _write_json(args.out, _json_doc("bounds", args, body))
        return EXIT_OK
    header = header_lines("bounds", _resolved(args))
    none = "NONE"
    header += [f"# rho_star = {none if not res.found else repr(res.rho_star)}",
               f"# p_star = {none if not res.found else repr(res.p_star)}",
               f"# q_star = {qs!r}"]
    if res.found:
        header.append(f"# bracket = {res.bracket[0]!r},{res.bracket[1]!r}")
    columns = ("t", "pa_lb_at_rho_star", "rho_star_t")
    with _sink(args.out) as fh:
        write_csv(fh, header, columns, ([t, _fmt(pa), _fmt(rt)] for t, pa, rt in table))
    return EXIT_OK


# ------------------------------------------------------------------ moments

def cmd_moments(args) -> int:
    seq = compute_moment_sequences(args.rho, args.T, args.base)
    header = header_lines("moments", _resolved(args))
    with _sink(args.out) as fh:
        write_csv(fh, header, MOMENT_COLUMNS, ([_fmt(x) for x in row] for row in seq.rows()))
    return EXIT_OK


# ------------------------------------------------------------------ simulate

def _sim_config(args, depth: Optional[int] = None) -> SimConfig:
    return SimConfig(ModelParams(args.d, args.p), args.depth if depth is None else depth,
                     args.steps, args.policy, args.sleeper_depth)


def _outcome_problems(model: str, config: SimConfig, out) -> list[str]:
    bad = []
    if out.root_visits < 0 or out.frogs_woken < 0:
        bad.append("negative count")
    if out.steps_used > config.step_cap:
        bad.append("steps_used exceeds step cap")
    if out.root_visits > out.steps_used:
        bad.append("more root visits than steps")
    if out.frogs_woken > config.initial_sleepers():
        bad.append("more frogs woken than sleepers")
    if config.depth_cap == 0 and out.root_visits:
        bad.append("root visits with depth cap 0")
    if model == "rfm" and out.kills is not None and out.truncation is not Truncation.STEP_CAP:
        if sum(out.kills.values()) != out.frogs_woken + 1:
            bad.append("removals do not account for every frog")
    return bad


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    config = _sim_config(args)
    outs = run_model_trials(args.model, config, args.trials, args.seed, args.workers,
                            root_frog=args.root_frog)
    problems = []
    if args.check_invariants:
        for i, o in enumerate(outs):
            for msg in _outcome_problems(args.model, config, o):
                problems.append((i, msg))
    s = summarize(outs)
    cols = RFM_COLUMNS if args.model == "rfm" else FM_COLUMNS
    trunc = {t.value: sum(o.truncation is t for o in outs) for t in Truncation}
    footer = [f"# summary trials = {s.trials}", f"# summary mean = {s.mean!r}",
              f"# summary variance = {s.variance!r}", f"# summary sem = {s.sem!r}",
              "# summary truncation = " + ",".join(f"{k}:{v}" for k, v in trunc.items())]
    if args.check_invariants:
        footer.append(f"# summary violations = {len(problems)}")
    with _sink(args.out) as fh:
        write_csv(fh, header_lines("simulate", _resolved(args)), cols,
                  (outcome_row(i, config, o, args.model) for i, o in enumerate(outs)), footer)
    if problems:
        i, msg = problems[0]
        print(f"invariant violation in trial {i}: {msg}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# ------------------------------------------------------------------ couple

def cmd_couple(args) -> int:
    from .coupling import FM_KD, coupled_trials

    if args.trials < 1:
        raise UsageError("--trials must be positive")
    rep = coupled_trials(args.kind, args.d, args.p, args.depth, args.trials, args.seed,
                         k=args.k, step_cap=args.steps, check=args.check_invariants,
                         root_frog=args.root_frog)
    small = "fm" if args.kind == FM_KD else "rfm"
    large = f"fm_{rep.k * args.d}" if args.kind == FM_KD else f"rfmprime_{args.d + 1}"
    columns = ("trial_id", f"{small}_root_visits", f"{large}_root_visits", "violations")
    footer = [f"# summary pair = {rep.pair_label}", f"# summary checks = {rep.checks}",
              f"# summary violations = {rep.violations}",
              f"# summary small_mean = {float(np.mean(rep.small_visits))!r}",
              f"# summary large_mean = {float(np.mean(rep.large_visits))!r}"]
    if rep.first_violation:
        fv = rep.first_violation
        footer.append(f"# first_violation trial_id = {fv['trial_id']} trial_seed = {fv['trial_seed']}"
                      f" invariant = {fv['invariant']}")
    with _sink(args.out) as fh:
        write_csv(fh, header_lines("couple", _resolved(args)), columns,
                  ([r.trial_id, r.small_root_visits, r.large_root_visits, r.violations]
                   for r in rep.rows), footer)
    if args.report:
        body = {"pair": rep.pair_label, "trials": rep.trials, "checks": rep.checks,
                "violations": rep.violations, "ok": rep.ok,
                "first_violation": rep.first_violation,
                "kill_law": rep.kill_law() if args.kind != FM_KD else []}
        _write_json(args.report, _json_doc("couple", args, body))
    if rep.violations:
        fv = rep.first_violation
        print(f"{rep.violations} invariant violation(s); first in trial {fv['trial_id']}"
              f" (trial_seed {fv['trial_seed']}): {fv['invariant']}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


# ------------------------------------------------------------------ sweep

def cmd_sweep(args) -> int:
    from .experiments import SWEEP_COLUMNS, sweep

    rep = sweep(args.d, args.p_grid, args.depth_grid, args.trials, args.seed, model=args.model,
                step_cap=args.steps, workers=args.workers)
    footer = [f"# diagnostic p = {g.p!r}: {g.label}" for g in rep.diagnostics]
    footer.append(f"# growth flag monotone in p = {rep.flags_monotone()}")
    with _sink(args.out) as fh:
        write_csv(fh, header_lines("sweep", _resolved(args)), SWEEP_COLUMNS, rep.rows(), footer)
    if args.json:
        _write_json(args.json, _json_doc("sweep", args, rep.as_dict()))
    return EXIT_OK


# ------------------------------------------------------------------ vt

VT_COLUMNS = ("mode", "t", "rho", "trials", "mean", "variance", "sem", "p_zero", "a_event_freq")


def _summary_row(mode, t, rho, xs: np.ndarray, a_freq=None) -> list:
    n = len(xs)
    mean = float(xs.mean())
    var = float(xs.var(ddof=1)) if n > 1 else 0.0
    return [mode, t, rho, n, repr(mean), repr(var), repr(math.sqrt(var / n)),
            repr(float(np.mean(xs == 0))), _fmt(a_freq)]


def cmd_vt(args) -> int:
    from .batch import vt_samples

    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.t < 0:
        raise UsageError("--t must be non-negative")
    if args.base == "auto":
        base = Base.BERNOULLI if args.root_frog == "fresh" else Base.ZERO
    else:
        base = Base(args.base)
    rows = []
    if args.mode in ("bound", "both"):
        xs = sample_rde(args.t, args.rho, args.trials, args.seed, base)
        rows.append(_summary_row("bound", args.t, args.rho, xs))
    if args.mode in ("empirical", "both"):
        params = ModelParams(args.d, p_of_rho(args.rho))
        xs, a = vt_samples(args.t, params, args.trials, args.seed, root_frog=args.root_frog,
                           step_cap=args.steps)
        rows.append(_summary_row("empirical", args.t, args.rho, xs, float(a.mean())))
    with _sink(args.out) as fh:
        write_csv(fh, header_lines("vt", _resolved(args)), VT_COLUMNS, rows)
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="frogtree", description="Frog models with drift on d-ary trees.")
    ap.add_argument("--version", action="version", version=f"frogtree {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_help="output file (default stdout)"):
        p.add_argument("--config", help="file of 'key = value' lines")
        p.add_argument("--out", help=out_help)

    p = sub.add_parser("bounds", help="threshold rho_star, p_star, q_star and the pa_lb table")
    common(p)
    p.add_argument("--T", type=int, default=51)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--grid", type=float, default=1e-3, help="scan spacing in rho")
    p.add_argument("--per-t", type=_on_off, default=False, metavar="on|off",
                   help="also solve the threshold for every t <= T")
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("moments", help="moment bound sequences for one rho")
    common(p)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--T", type=int, default=51)
    p.add_argument("--base", choices=[b.value for b in Base], default=Base.BERNOULLI.value)
    p.set_defaults(func=cmd_moments)

    def sim_args(p, steps=10**7):
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--p", type=float, default=0.3)
        p.add_argument("--depth", type=int, default=10, help="depth cap")
        p.add_argument("--steps", type=int, default=steps, help="step cap")
        p.add_argument("--trials", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="independent trials of FM, FM' or RFM")
    common(p)
    sim_args(p)
    p.add_argument("--model", choices=MODELS, default="fm")
    p.add_argument("--policy", choices=["uniform", "fifo"], default="uniform")
    p.add_argument("--sleeper-depth", type=int, default=None)
    p.add_argument("--root-frog", choices=["fresh", "descend"], default="fresh")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--check-invariants", type=_on_off, default=False, metavar="on|off")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("couple", help="coupled trials with invariant checking")
    common(p)
    sim_args(p)
    p.add_argument("--kind", choices=["fm-kd", "rfm-plus1"], default="fm-kd")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--root-frog", choices=["fresh", "descend"], default="fresh")
    p.add_argument("--report", help="JSON report file")
    p.add_argument("--check-invariants", type=_on_off, default=True, metavar="on|off")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("sweep", help="truncated root visits over a grid of p and depth caps")
    common(p)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--p-grid", type=_float_list, default=[0.3, 0.35, 0.4, 0.45])
    p.add_argument("--depth-grid", type=_int_list, default=[6, 8, 10])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=10**7, help="step cap")
    p.add_argument("--model", choices=MODELS, default="fm")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--json", help="JSON report file")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("vt", help="V_t by direct simulation and by the surrogate recursion")
    common(p)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.72)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=10**7, help="step cap")
    p.add_argument("--mode", choices=["bound", "empirical", "both"], default="both")
    p.add_argument("--root-frog", choices=["fresh", "descend"], default="fresh")
    p.add_argument("--base", choices=["auto", "zero", "bernoulli"], default="auto",
                   help="V_0 law of the surrogate; auto follows --root-frog")
    p.set_defaults(func=cmd_vt)
    return ap


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("command", nargs="?")
    known, _ = pre.parse_known_args(argv)
    choices = ap._subparsers._group_actions[0].choices
    if known.config and known.command in choices:
        try:
            values = read_config_file(known.config)
        except OSError as e:
            raise _IOFailure(f"cannot read {known.config}: {e.strerror}") from None
        sub = choices[known.command]
        _apply_config(sub, values)
        for a in sub._actions:
            if a.dest in values:
                a.required = False
    return ap.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DomainError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _IOFailure as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
