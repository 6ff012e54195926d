import io
import math

import pytest

from frogtree.core.tree import ModelParams
from frogtree.experiments import GROWING, SATURATING, growth_diagnostic, sweep
from frogtree.fm import ConfigError, SimConfig
from frogtree.runner import (FM_COLUMNS, RFM_COLUMNS, default_workers, header_lines, outcome_row,
                             run_model_trials, write_csv)


def test_parallel_equals_serial():
    c = SimConfig(ModelParams(2, 0.4), 6)
    for model in ("fm", "fmprime", "rfm"):
        a = run_model_trials(model, c, 12, 3, workers=1)
        b = run_model_trials(model, c, 12, 3, workers=3)
        assert [o.key() for o in a] == [o.key() for o in b]


def test_engines_agree_through_runner():
    c = SimConfig(ModelParams(2, 0.35), 5)
    for model in ("fm", "rfm"):
        a = run_model_trials(model, c, 10, 1, engine="python")
        b = run_model_trials(model, c, 10, 1, engine="kernel")
        assert [o.key() for o in a] == [o.key() for o in b]


def test_runner_errors(monkeypatch):
    c = SimConfig(ModelParams(2, 0.3), 3)
    with pytest.raises(ConfigError):
        run_model_trials("sfm", c, 1, 0)
    with pytest.raises(ConfigError):
        run_model_trials("fm", c, 0, 0)
    with pytest.raises(ConfigError):
        run_model_trials("fm", c, 1, 0, engine="gpu")
    monkeypatch.setenv("FROGTREE_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("FROGTREE_WORKERS", "many")
    with pytest.raises(ConfigError):
        default_workers()
    monkeypatch.delenv("FROGTREE_WORKERS")
    assert default_workers() == 1


def test_csv_rows():
    c = SimConfig(ModelParams(2, 0.3), 3)
    out = run_model_trials("rfm", c, 1, 0)[0]
    row = outcome_row(0, c, out, "rfm")
    assert len(row) == len(RFM_COLUMNS)
    fm = run_model_trials("fm", c, 1, 0)[0]
    assert len(outcome_row(0, c, fm, "fm")) == len(FM_COLUMNS)
    buf = io.StringIO()
    write_csv(buf, header_lines("x", {"a": 1}), ("a", "b"), [[1, 2]], ["# end"])
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# frogtree ")
    assert lines[1:] == ["# command = x", "# a = 1", "a,b", "1,2", "# end"]


def _flat(m, n=40):
    return [[m] * n, [m] * n, [m] * n]


def test_growth_diagnostic_flat_and_growing():
    assert not growth_diagnostic(0.1, _flat(3)).growing
    grow = [[i % 3 for i in range(60)], [5 + i % 3 for i in range(60)], [15 + i % 4 for i in range(60)]]
    g = growth_diagnostic(0.4, grow)
    assert g.growing and g.label == GROWING
    # still increasing but with shrinking increments
    sat = [[i % 3 for i in range(60)], [5 + i % 3 for i in range(60)], [8 + i % 3 for i in range(60)]]
    g = growth_diagnostic(0.3, sat)
    assert not g.growing and g.label == SATURATING
    assert "heuristic" in GROWING and "consistent with" in SATURATING
    with pytest.raises(ConfigError):
        growth_diagnostic(0.3, [[1, 2]])


def test_small_sweep():
    rep = sweep(2, [0.1, 0.45], [4, 6, 8], 60, 2)
    assert rep.flags() == [False, True]
    assert rep.flags_monotone()
    rows = list(rep.rows())
    assert len(rows) == 6
    d = rep.as_dict()
    assert d["monotone_in_p"] is True
    assert all(math.isfinite(c["mean"]) for c in d["cells"])
    with pytest.raises(ConfigError):
        sweep(2, [0.3], [5], 10, 0)
