import io
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dexanno.errors import InputError
from dexanno.jsonio import dumps, format_float, read_jsonl, write_jsonl


@given(x=st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    s = format_float(x)
    assert float(s) == x
    assert isinstance(json.loads(s), float)


def test_seventeen_digits():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1.0) == "1.0"


def test_rejects_nan():
    with pytest.raises(ValueError):
        format_float(float("nan"))


def test_dumps_structure():
    doc = {"a": [1, 2.5, None, True], "b": {"c": np.float64(0.25)}, "d": np.array([1.0, 2.0]), "e": "x\"y"}
    assert json.loads(dumps(doc)) == {"a": [1, 2.5, None, True], "b": {"c": 0.25}, "d": [1.0, 2.0], "e": 'x"y'}


def test_write_read(tmp_path):
    recs = [{"k": i, "v": i / 3} for i in range(5)]
    path = tmp_path / "x.jsonl"
    assert write_jsonl(recs, path) == 5
    assert read_jsonl(path) == recs


def test_bad_line_names_line_number():
    with pytest.raises(InputError, match="line 2"):
        read_jsonl(io.StringIO('{"a": 1}\n{oops\n'))
