"""rng, tables and parallel helpers."""

import json
import math
import threading
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
from hofa import parallel, tables
from hofa.rng import SplitMix64


def test_splitmix_reference_stream():
    r = SplitMix64(0)
    assert [r.next_u64() for _ in range(3)] == frozen.SPLITMIX_SEED0


@given(st.integers(0, 2**64 - 1), st.integers(1, 1000))
def test_randbelow_range(seed, n):
    r = SplitMix64(seed)
    assert all(0 <= r.randbelow(n) < n for _ in range(20))
    x = r.random()
    assert 0 <= x < 1


def test_rng_helpers():
    r = SplitMix64(9)
    assert sorted(r.sample(range(10), 10)) == list(range(10))
    assert r.choice("abc") in "abc"
    assert -3 <= r.randint(-3, 3) <= 3
    assert all(0 <= x < 20 for x in r.subset(20))
    with pytest.raises(ValueError):
        r.randbelow(0)
    a, b = SplitMix64(5).spawn(), SplitMix64(5).spawn()
    assert a.next_u64() == b.next_u64()


@pytest.mark.parametrize("x,text", [(1.0, "1.0"), (0.1, "0.1"), (1 / 3, "0.333333333333"),
                                    (1e-20, "1e-20"), (-2.5, "-2.5"), (float("inf"), "inf")])
def test_format_float(x, text):
    assert tables.format_float(x) == text


@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_format_float_round_trips(x):
    text = tables.format_float(x)
    assert tables.format_float(float(text)) == text
    assert float(text) == pytest.approx(x, rel=1e-11, abs=0)


ROWS = [{"a": 1, "b": F(1, 3), "c": 0.5, "d": True, "e": "x", "f": 1 + 2j}]
COLS = ["a", "b", "c", "d", "e", "f"]


def test_csv_render():
    text = tables.render(ROWS, COLS, "csv")
    assert text == "a,b,c,d,e,f\n1,1/3,0.5,1,x,1.0 2.0\n"


def test_json_round_trip(tmp_path):
    path = tmp_path / "t.json"
    text = tables.emit_table(ROWS, COLS, "json", path)
    assert path.read_text() == text
    cols, rows = tables.parse_table(text, "json")
    assert cols == COLS
    assert rows[0]["b"] == "1/3" and rows[0]["c"] == 0.5 and rows[0]["d"] is True
    assert json.loads(text)["columns"] == COLS


def test_csv_parse_round_trip():
    cols, rows = tables.parse_table(tables.render(ROWS, COLS), "csv")
    assert cols == COLS and rows[0]["e"] == "x"


def test_empty_rows_give_header_only():
    assert tables.render([], ["x", "y"], "csv") == "x,y\n"
    assert json.loads(tables.render([], ["x"], "json")) == {"columns": ["x"], "rows": []}


def test_unknown_format():
    with pytest.raises(ValueError):
        tables.render(ROWS, COLS, "xml")


def test_pmap_preserves_order(monkeypatch):
    monkeypatch.setenv("HOFA_THREADS", "3")
    parallel.set_threads(None)
    assert parallel.threads() == 3
    seen = set()

    def work(x):
        seen.add(threading.get_ident())
        return x * x

    assert parallel.pmap(work, range(50)) == [x * x for x in range(50)]
    parallel.set_threads(1)
    assert parallel.threads() == 1
    assert parallel.pmap(math.sqrt, [4, 9]) == [2, 3]
    parallel.set_threads(None)
