import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcld.errors import InvalidInput
from mcld.serialize import dumps, format_number, write_csv, write_json


class TestFormatNumber:
    def test_ints_are_plain(self):
        assert format_number(42) == "42"
        assert format_number(True) == "true"

    def test_non_finite_rejected(self):
        for bad in (math.inf, -math.inf, math.nan):
            with pytest.raises(InvalidInput):
                format_number(bad)

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_seventeen_digits_round_trip(self, x):
        assert float(format_number(x)) == x


class TestDumps:
    def test_valid_json_with_order_preserved(self):
        obj = {"b": [1, 0.5, None], "a": {"nested": "x"}, "flag": False}
        text = dumps(obj)
        assert json.loads(text) == obj
        assert text.index('"b"') < text.index('"a"')

    def test_unknown_type_rejected(self):
        with pytest.raises(InvalidInput):
            dumps({"x": object()})


def test_writers_round_trip(tmp_path):
    write_json(tmp_path / "o.json", {"v": [0.1, 2]})
    assert json.loads((tmp_path / "o.json").read_text()) == {"v": [0.1, 2]}
    write_csv(tmp_path / "o.csv", ("a", "b"), [(1, 0.5), (2, 0.25)])
    lines = (tmp_path / "o.csv").read_text().splitlines()
    assert lines == ["a,b", "1,0.5", "2,0.25"]
