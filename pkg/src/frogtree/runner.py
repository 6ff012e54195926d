"""Seeded multi-trial execution and CSV output.

Trial i always uses ``trial_seed(master_seed, i)``, so results do not
depend on how trials are spread over workers; chunks are merged back in
trial order.  The worker count defaults to the ``FROGTREE_WORKERS``
environment variable (1 if unset).
"""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from typing import IO, Iterable, Optional, Sequence

from .core.rng import trial_seed
from .fm import ConfigError, SimConfig, TrialOutcome, run_fm, run_fm_prime

MODELS = ("fm", "fmprime", "rfm")
WORKERS_ENV = "FROGTREE_WORKERS"

FM_COLUMNS = ("trial_id", "d", "p", "depth_cap", "step_cap", "root_visits", "frogs_woken",
              "steps_used", "truncation")
RFM_COLUMNS = FM_COLUMNS + ("t", "a_event", "hit_root", "hit_visited", "early", "cap")


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be positive")
    return n


def _make_runner(model: str, config: SimConfig, root_frog: str, engine: str):
    from .batch import FMBatch, RFMBatch, fm_fits, rfm_fits
    from .rfm import run_rfm

    if engine not in ("auto", "python", "kernel"):
        raise ConfigError(f"unknown engine {engine!r}")
    if model in ("fm", "fmprime"):
        silent = model == "fmprime"
        if engine == "kernel" or (engine == "auto" and fm_fits(config)):
            return FMBatch(config, silent=silent).run
        return (lambda s: run_fm_prime(config, s)) if silent else (lambda s: run_fm(config, s))
    if model == "rfm":
        if engine == "kernel" or (engine == "auto" and rfm_fits(config)):
            return RFMBatch(config, root_frog).run
        return lambda s: run_rfm(config, s, root_frog=root_frog)
    raise ConfigError(f"model must be one of {MODELS}, got {model!r}")


def _chunk(args) -> list[TrialOutcome]:
    model, config, root_frog, engine, master_seed, lo, hi = args
    run = _make_runner(model, config, root_frog, engine)
    return [run(trial_seed(master_seed, i)) for i in range(lo, hi)]


def run_model_trials(model: str, config: SimConfig, trials: int, master_seed: int,
                     workers: Optional[int] = None, *, root_frog: str = "fresh",
                     engine: str = "auto") -> list[TrialOutcome]:
    """Outcomes of trials 0..trials-1, in trial order."""
    if model not in MODELS:
        raise ConfigError(f"model must be one of {MODELS}, got {model!r}")
    if trials < 1:
        raise ConfigError("trials must be positive")
    workers = default_workers() if workers is None else workers
    if workers < 1:
        raise ConfigError("workers must be positive")
    workers = min(workers, trials)
    if workers == 1:
        return _chunk((model, config, root_frog, engine, master_seed, 0, trials))
    bounds = [trials * j // workers for j in range(workers + 1)]
    jobs = [(model, config, root_frog, engine, master_seed, bounds[j], bounds[j + 1])
            for j in range(workers)]
    out: list[TrialOutcome] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_chunk, jobs):
            out.extend(part)
    return out


def outcome_row(trial_id: int, config: SimConfig, out: TrialOutcome, model: str) -> list:
    prm = config.params
    row = [trial_id, prm.d, prm.p, config.depth_cap, config.step_cap, out.root_visits,
           out.frogs_woken, out.steps_used, out.truncation.value]
    if model == "rfm":
        kills = out.kills or {}
        row += [config.sleepers, int(bool(out.a_event)), kills.get("hit_root", 0),
                kills.get("hit_visited", 0), kills.get("early", 0), kills.get("cap", 0)]
    return row


def header_lines(command: str, config: dict) -> list[str]:
    from . import __version__

    lines = [f"# frogtree {__version__}", f"# command = {command}"]
    lines += [f"# {k} = {v}" for k, v in config.items()]
    return lines


def write_csv(fh: IO[str], header: Sequence[str], columns: Sequence[str],
              rows: Iterable[Sequence], footer: Sequence[str] = ()) -> None:
    for line in header:
        fh.write(line + "\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(r)
    for line in footer:
        fh.write(line + "\n")


def csv_text(header, columns, rows, footer=()) -> str:
    buf = io.StringIO()
    write_csv(buf, header, columns, rows, footer)
    return buf.getvalue()
