import logging
from fractions import Fraction

from support_lab.density import DensityReport
from support_lab.store import CacheRecord, OrderCache, decimal6, format_value, render_report
from support_lab.support import DivisibilityReport, ScanRow

CV, PT = "0,0,1,-1,0", "0:0:1"


def test_cache_round_trip(tmp_path):
    path = tmp_path / "c" / "orders.cache"
    cache = OrderCache(path)
    assert cache.get("0,0,1,-1,0", "0:0:1", 5) is None
    cache.put_many([CacheRecord("0,0,1,-1,0", "0:0:1", 5, 8, 8), CacheRecord("0,0,1,-1,0", "0:0:1", 7, 9, 9)])
    again = OrderCache(path)
    assert len(again) == 2
    assert again.get("0,0,1,-1,0", "0:0:1", 7).point_order == 9


def test_last_record_wins(tmp_path):
    path = tmp_path / "orders.cache"
    cache = OrderCache(path)
    cache.put(CacheRecord(CV, PT, 11, 12, 6))
    cache.put(CacheRecord(CV, PT, 11, 12, 12))
    assert OrderCache(path).get(CV, PT, 11).point_order == 12


def test_corrupt_lines_are_skipped(tmp_path, caplog):
    path = tmp_path / "orders.cache"
    good = CacheRecord(CV, PT, 13, 14, 7).to_line()
    path.write_text(good + "garbage line\n" + f"{CV}|{PT}|17|18|5\n", encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        cache = OrderCache(path)
    assert cache.corrupt_lines == 2 and len(cache) == 1
    assert "corrupt" in caplog.text


def test_memory_cache():
    cache = OrderCache()
    cache.put(CacheRecord(CV, PT, 5, 6, 3))
    assert cache.get(CV, PT, 5).group_order == 6


def test_format_helpers():
    assert format_value(True) == "yes" and format_value(False) == "no"
    assert format_value(Fraction(3, 4)) == "3/4"
    assert decimal6(Fraction(1, 3)) == "0.333333"
    assert decimal6(Fraction(2, 3)) == "0.666667"
    assert decimal6(Fraction(1, 2 * 10**6)) == "0.000001"
    assert decimal6(None) == "undefined"


def test_render_header_only_and_ordering():
    empty = DivisibilityReport("scan-ec", "d", 10, ())
    assert render_report(empty) == b"p,ord_P,ord_Q,divides\n"
    assert render_report(empty, "json-lines") == b""
    rep = DivisibilityReport("scan-ec", "d", 10, (ScanRow(5, 8, 4, True), ScanRow(7, 9, 2, False)))
    assert render_report(rep) == b"p,ord_P,ord_Q,divides\n5,8,4,yes\n7,9,2,no\n"
    lines = render_report(rep, "json-lines").decode().splitlines()
    assert lines[0] == '{"p":5,"ord_P":8,"ord_Q":4,"divides":"yes"}'
    assert render_report(rep) == render_report(rep)


def test_render_density_undefined():
    rep = DensityReport(2, 10, 0, 0, 0, ())
    assert render_report(rep) == b"checkpoint,count_div,count_total,density_decimal\n"
