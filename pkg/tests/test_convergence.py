import math

import numpy as np
import pytest

from hybrid_tdgl.config import build_config
from hybrid_tdgl.convergence import NORMS, ConvergenceReport, convergence_study, rates_from_errors
from hybrid_tdgl.errors import ConfigError

SMALL = build_config({
    "grid": {"dim": 2, "nodes": 12},
    "scheme": {"tau": 0.01, "S": 4.0},
    "field": {"kind": "decaying"},
})


def test_rates_match_hand_computation():
    errs = [0.8, 0.4, 0.1, 0.05]
    assert rates_from_errors(errs) == pytest.approx((1.0, 2.0, 1.0))
    assert rates_from_errors([3.0, 3.0 / 2 ** 0.76]) == pytest.approx((0.76,))
    assert rates_from_errors([1.0]) == ()


def test_length_one_ladder_has_empty_rates():
    rep = convergence_study(SMALL, [0.008], 0.002, t_compare=0.016)
    assert all(len(rep.errors[k]) == 1 and rep.errors[k][0] > 0 for k in NORMS)
    assert all(rep.rates[k] == () for k in NORMS)


def test_small_study_is_first_order_and_writes_csv(tmp_path):
    rep = convergence_study(SMALL, [0.008, 0.004], 0.001, t_compare=0.016)
    for k in NORMS:
        assert len(rep.rates[k]) == 1 and math.isfinite(rep.rates[k][0])
    assert 0.6 < rep.rates["l2_psi"][0] < 1.5
    p = tmp_path / "conv.csv"
    rep.write_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0].split(",")[:3] == ["tau", "l2_psi", "l2_psi_rate"]
    assert len(lines) == 3
    assert "rate" in rep.format()


def test_preconditions():
    with pytest.raises(ConfigError):
        convergence_study(SMALL, [0.008], 0.004, t_compare=0.016)
    with pytest.raises(ConfigError):
        convergence_study(SMALL, [0.005], 0.001, t_compare=0.016)
    with pytest.raises(ConfigError):
        convergence_study(SMALL, [], 0.001)


def test_report_rows():
    rep = ConvergenceReport((0.2, 0.1), {k: (2.0, 1.0) for k in NORMS},
                            {k: (1.0,) for k in NORMS}, 1.0, 0.01)
    rows = rep.rows()
    assert math.isnan(rows[0]["l2_psi_rate"]) and rows[1]["hcurl_a_rate"] == 1.0
    assert np.isclose(rows[1]["tau"], 0.1)
