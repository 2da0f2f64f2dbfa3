import math

import numpy as np

from altbd.utils import csv_float, json_float, safe_log


def test_safe_log_of_zero_is_quiet():
    with np.errstate(all="raise"):
        out = safe_log(np.array([0.0, 1.0, math.e]))
    assert out[0] == -math.inf
    assert list(out[1:]) == [0.0, 1.0]


def test_json_float():
    assert json_float(0.5) == 0.5
    assert [json_float(x) for x in (math.inf, -math.inf, math.nan)] == ["inf", "-inf", "nan"]


def test_csv_float_round_trips():
    for x in (0.1, 1 / 3, 1e-300, 2.5e17, -0.0):
        assert float(csv_float(x)) == x
    assert csv_float(-math.inf) == "-inf"
