"""Acceptance criteria at their stated parameters.

Each test records one PASS/FAIL line, shown in the terminal summary.
"""

import math
from fractions import Fraction

import pytest

from support_lab import density as dens
from support_lab import ec_core as ec
from support_lab import mahler as mh
from support_lab import rigidity_sl2 as sl
from support_lab import support as sup
from support_lab.ec_core import CurveOverQ, RationalPoint
from support_lab.modmath import is_squarefree
from support_lab.store import OrderCache, render_report

from conftest import BATTERY, record

E37 = CurveOverQ(0, 0, 1, -1, 0)
P37 = RationalPoint(0, 0, 1)


@pytest.fixture(scope="module")
def shared_cache():
    return OrderCache()


def test_c1_easy_direction(shared_cache):
    cfg = sup.ScanConfig(10**4, cache=shared_cache)
    results = {}
    for n in (1, 2, 3, 5, 10):
        rep = sup.scan_ec(E37, P37, E37, ec.ec_scalar_mul(n, P37, E37), cfg)
        results[n] = (rep.usable, len(rep.violations))
    ok = all(v == 0 for _, v in results.values())
    record(1, ok, f"scan_ec B=10^4, n in {{1,2,3,5,10}}: (usable, violations) = {results}")
    assert ok


def test_c2_multiplier_reconstruction(shared_cache):
    cfg = sup.ScanConfig(10**4, cache=shared_cache)
    wrong = []
    for n in range(-50, 51):
        cert = sup.infer_multiplier_ec(E37, P37, ec.ec_scalar_mul(n, P37, E37), 50, cfg)
        if not (cert.verified and cert.candidate == n):
            wrong.append((n, cert.verdict, cert.candidate))
    E2, Q2 = CurveOverQ(0, 0, 0, 1, 1), RationalPoint(0, 1, 1)
    cross = sup.infer_multiplier_ec(E37, P37, Q2, 50, sup.ScanConfig(1000), codomain=E2)
    ok = not wrong and cross.verdict == sup.DISPROVED
    record(2, ok, f"101 multipliers |n|<=50 verified (failures: {wrong}); "
                  f"cross-curve verdict {cross.verdict} at p={cross.disproof_prime}")
    assert ok


def test_c3_multiplicative_inference():
    cfg = sup.ScanConfig(10**4)
    wrong = []
    for x in (Fraction(2), Fraction(3), Fraction(5, 2)):
        for m in range(-40, 41):
            if m == 0:
                continue  # y = 1 is a degenerate input
            cert = sup.infer_multiplier_gm(x, x**m, 40, cfg)
            if not (cert.verified and cert.candidate == m):
                wrong.append((x, m, cert.verdict))
    ok = not wrong
    record("3a", ok, f"infer_multiplier_gm recovers all m (0<|m|<=40) for x in {{2,3,5/2}}; failures: {wrong}")
    assert ok


def test_c3_scan_gm_first_violation_oracle():
    rep = sup.scan_gm(4, 2, sup.ScanConfig(100))
    direct = next(p for p in (5, 7, 11, 13)
                  if min(k for k in range(1, p) if pow(4, k, p) == 1)
                  % min(k for k in range(1, p) if pow(2, k, p) == 1))
    ok = rep.first_violation == direct == 5 and 11 in rep.violations
    record("3b", ok, f"scan_gm(4,2) first violation {rep.first_violation}, direct exponentiation gives {direct}; "
                     f"11 is also a violation: {11 in rep.violations}")
    assert ok


@pytest.mark.xfail(strict=True, reason="ord(4)=2 and ord(2)=4 mod 5, so the first violation is 5, not 11")
def test_c3_scan_gm_first_violation_literal():
    rep = sup.scan_gm(4, 2, sup.ScanConfig(100))
    ok = rep.first_violation == 11
    record("3c", ok, f"literal target 'first violation at p=11': observed {rep.first_violation} (expected failure)")
    assert ok


def _search_two_torsion_curve():
    """Smallest y^2 = x^3 + a x^2 + b x (rational 2-torsion (0,0)) with a non-torsion integral point."""
    for size in range(1, 6):
        for a in range(-size, size + 1):
            for b in range(-size, size + 1):
                if b == 0 or a * a - 4 * b == 0:
                    continue
                E = CurveOverQ(0, a, 0, b, 0)
                for x in range(-size, size + 1):
                    r = x**3 + a * x * x + b * x
                    if r <= 0 or math.isqrt(r) ** 2 != r:
                        continue
                    P = RationalPoint(x, math.isqrt(r), 1)
                    if not ec.is_torsion(E, P):
                        return E, P
    raise AssertionError("search found no curve")


def test_c4_specialization():
    E, P = _search_two_torsion_curve()
    cfg = sup.ScanConfig(1000)
    j = ec.velu_isogeny(E, RationalPoint(0, 0, 1))
    chains = {f"[MultiplyBy({n})]": sup.HomChain(E, (sup.MultiplyBy(n),)) for n in (-1, 2, 3, 5)}
    chains["[2-isogeny . MultiplyBy(3)]"] = sup.HomChain(E, (sup.MultiplyBy(3), j))
    detail, ok = [], True
    for name, chain in chains.items():
        rep = sup.check_specialization(chain, P, cfg)
        good = [p for p in cfg.primes() if all(ec.is_good_prime(C, p) for C in chain.curves())]
        full = [r.p for r in rep.rows] == good and rep.all_commute
        ok &= full
        detail.append(f"{name} {sum(r.commutes for r in rep.rows)}/{len(good)}")
    record(4, ok, f"curve {list(E.ainvs)}, P={P}: " + ", ".join(detail))
    assert ok


def test_c5_density(shared_cache):
    lo = sup.ScanConfig(10**4, cache=shared_cache)
    hi = sup.ScanConfig(2 * 10**4, cache=shared_cache)
    ok, detail = True, []
    for ell in (2, 3, 5):
        a = dens.density_scan(E37, P37, ell, lo)
        b = dens.density_scan(E37, P37, ell, hi)
        share = min(a.density_div, a.density_coprime)
        drift = abs(b.density_div - a.density_div)
        ok &= a.count_div > 0 and a.count_coprime > 0 and share >= Fraction(2, 100) and drift <= Fraction(5, 100)
        detail.append(f"l={ell}: {float(a.density_div):.4f}->{float(b.density_div):.4f} "
                      f"(min class {float(share):.3f}, drift {float(drift):.4f})")
    record(5, ok, "; ".join(detail))
    assert ok


def _all_sl2(q):
    return list(sl.sl2_elements(q))


def test_c6_sl2():
    deligne_bad = 0
    moduli = [m for m in range(2, 1001) if is_squarefree(m)]
    for m in moduli:
        for a in range(1, m):
            if math.gcd(a, m) == 1:
                if sl.product(sl.deligne_factorization(a, m)) != sl.diag(pow(a, -1, m), a, m):
                    deligne_bad += 1
    sizes, mult_bad = {}, 0
    for q in (5, 7):
        elems = _all_sl2(q)
        sizes[q] = len(elems)
        mult_bad += sum(1 for g in elems if sl.elementary_decomposition(g).evaluate() != g)
    unip = {p: sl.unipotent_power_conjugacy_count(p) for p in (5, 7, 11, 13)}
    # non-central classes with trace t != +-2 are determined by t; one companion matrix each
    semis = {}
    for q in (5, 7, 11, 13):
        semis[q] = max(sl.semisimple_power_conjugacy_count(sl.Mat2ModM(q, 0, -1, 1, t))
                       for t in range(q) if (t * t - 4) % q)
    grid = [(p, q) for p in (5, 7, 11, 13) for q in (5, 7, 11, 13) if p != q]
    grid_bad = [(p, q) for p, q in grid if sl.has_element_of_order(q, p) != (q * (q * q - 1) % p == 0)]
    ok = (deligne_bad == 0 and mult_bad == 0 and all(unip[p] == (p - 1) // 2 for p in unip)
          and max(semis.values()) <= 2 and not grid_bad)
    record(6, ok, f"Deligne on {len(moduli)} squarefree moduli: {deligne_bad} failures; "
                  f"multiply-back on |SL2|={sizes}: {mult_bad} failures; unipotent {unip}; "
                  f"max semisimple {semis}; order grid mismatches {grid_bad}")
    assert ok


def test_c7_mahler():
    import random

    f = mh.MahlerMap(mh.ALL_ONES)
    square = [N for N in range(2, 201) if not mh.check_commuting_square(f, N, 500)]
    witness = [d for d in range(31) if mh.nonpolynomiality_witness(f, d, d + 3) is None]
    rng = random.Random(7)
    failures = 0
    for _ in range(1000):
        N, n, k = rng.randint(2, 200), rng.randint(-500, 500), rng.randint(-3, 3)
        failures += mh.eval_phi(f, n, N) != mh.eval_phi(f, n + k * N, N)
    ok = not square and not witness and failures == 0
    record(7, ok, f"commuting square N<=200, R=500 failures {square}; degrees without witness {witness}; "
                  f"congruence triples failing {failures}/1000")
    assert ok


def test_c8_infrastructure(tmp_path, shared_cache):
    Q = ec.ec_scalar_mul(2, P37, E37)
    cache_path = tmp_path / "orders.cache"
    one = render_report(sup.scan_ec(E37, P37, E37, Q, sup.ScanConfig(3000, workers=1)))
    many = render_report(sup.scan_ec(E37, P37, E37, Q, sup.ScanConfig(3000, workers=3)))
    cold = render_report(sup.scan_ec(E37, P37, E37, Q, sup.ScanConfig(3000, cache=OrderCache(cache_path))))
    warm_cache = OrderCache(cache_path)
    warm = render_report(sup.scan_ec(E37, P37, E37, Q, sup.ScanConfig(3000, cache=warm_cache)))
    identical = one == many == cold == warm

    assoc_bad, curves = 0, 0
    for p in (5, 7, 11, 13):
        for A, B in BATTERY:
            try:
                C = ec.ReducedCurve(p, A, B)
            except ec.SingularCurveError:
                continue
            curves += 1
            pts = C.points()
            for U in pts:
                for V in pts:
                    UV = ec.ec_add(U, V, C)
                    for W in pts:
                        assoc_bad += ec.ec_add(UV, W, C) != ec.ec_add(U, ec.ec_add(V, W, C), C)

    orders = [(r.p, r.group_order) for c in (warm_cache, shared_cache) for r in c.records()]
    orders += [(p, ec.group_order(C)) for p in (5, 7, 11, 13) for C in _battery_curves(p)]
    hasse_bad = [(p, n) for p, n in orders if (n - p - 1) ** 2 > 4 * p]
    ok = identical and assoc_bad == 0 and not hasse_bad
    record(8, ok, f"byte-identical 1/3 workers and cold/warm cache: {identical}; "
                  f"associativity on {curves} curves: {assoc_bad} failures; "
                  f"Hasse over {len(orders)} group orders: {len(hasse_bad)} failures")
    assert ok


def _battery_curves(p):
    out = []
    for A, B in BATTERY:
        try:
            out.append(ec.ReducedCurve(p, A, B))
        except ec.SingularCurveError:
            pass
    return out
