from fractions import Fraction

import pytest

from support_lab import density as dens
from support_lab import ec_core as ec
from support_lab.support import InputError, ScanConfig


def test_density_counts_match_direct_orders(e37):
    E, P = e37
    rep = dens.density_scan(E, P, 3, ScanConfig(600))
    orders = {}
    for p in ScanConfig(600).primes():
        C = ec.reduce_curve(E, p)
        if C:
            orders[p] = ec.point_order(ec.reduce_point(P, E, p), C).order
    assert rep.usable == len(orders)
    assert rep.count_div == sum(1 for o in orders.values() if o % 3 == 0)
    assert rep.count_div + rep.count_coprime == rep.usable
    assert rep.density_div == Fraction(rep.count_div, rep.usable)
    assert rep.trace[-1].count_total == rep.usable


def test_trace_is_cumulative(e37):
    E, P = e37
    rep = dens.density_scan(E, P, 2, ScanConfig(2000))
    assert len(rep.trace) == dens.CHECKPOINTS
    totals = [t.count_total for t in rep.trace]
    assert totals == sorted(totals)
    assert [t.checkpoint for t in rep.trace][-1] == 2000


def test_empty_report(e37):
    E, P = e37
    rep = dens.density_scan(E, P, 2, ScanConfig(5, skip={5}))
    assert rep.empty and rep.density_div is None
    assert rep.summary()["density_div"] == "undefined"
    assert all(row[3] == "undefined" for row in rep.table())


def test_rejects_composite_ell_and_torsion(e37, two_torsion_curve):
    E, P = e37
    with pytest.raises(InputError):
        dens.density_scan(E, P, 4, ScanConfig(100))
    E2, _, T = two_torsion_curve
    with pytest.raises(InputError):
        dens.density_scan(E2, T, 2, ScanConfig(100))


def test_exact_torsion_order(two_torsion_curve, e37):
    E, P, T = two_torsion_curve
    assert dens.exact_torsion_order(E, T) == 2
    assert dens.exact_torsion_order(E, P) is None
    assert dens.exact_torsion_order(*e37) is None


def test_torsion_shift_cross_check(two_torsion_curve):
    E, P, T = two_torsion_curve
    rep = dens.torsion_shift_scan(E, P, T, ScanConfig(3000))
    assert rep.cross_check and rep.cross_check_holds
    for row in rep.cross_check:
        assert row.ord_shifted % 2 == 1 and row.ord_P % 2 == 0


def test_torsion_shift_requires_prime_order_torsion(two_torsion_curve):
    E, P, _ = two_torsion_curve
    with pytest.raises(InputError):
        dens.torsion_shift_scan(E, P, P, ScanConfig(100))
