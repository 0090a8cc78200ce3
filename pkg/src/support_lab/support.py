"""Order-divisibility scans, multiplier inference and specialization checks.

A prime p is usable for a scan when 5 <= p <= B, p is not on the skip list,
and every curve involved has good reduction at p (for the multiplicative
group: p divides no numerator or denominator of the inputs).
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Union

from . import ec_core as ec
from .ec_core import CurveOverQ, Isogeny, RationalPoint
from .modmath import (
    Inconsistent,
    crt_combine,
    discrete_log_mod,
    multiplicative_order,
    sieve_primes,
    symmetric_residue,
)
from .store import CacheRecord, OrderCache

MIN_PRIME = 5
TORSION_SAMPLE_PRIMES = 12
TORSION_SAMPLE_THRESHOLD = 16


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class ScanConfig:
    bound: int
    skip: frozenset = frozenset()
    cache: OrderCache | None = field(default=None, compare=False)
    workers: int = 1

    def __post_init__(self):
        if self.bound < MIN_PRIME:
            raise InputError(f"prime bound must be at least {MIN_PRIME}")
        object.__setattr__(self, "skip", frozenset(self.skip))

    def primes(self):
        return [p for p in sieve_primes(self.bound).primes if p >= MIN_PRIME and p not in self.skip]


class ScanRow(NamedTuple):
    p: int
    ord_P: int
    ord_Q: int
    divides: bool


@dataclass(frozen=True)
class DivisibilityReport:
    kind: str
    description: str
    bound: int
    rows: tuple[ScanRow, ...]

    columns = ("p", "ord_P", "ord_Q", "divides")

    @property
    def violations(self):
        return [r.p for r in self.rows if not r.divides]

    @property
    def first_violation(self):
        v = self.violations
        return v[0] if v else None

    @property
    def usable(self):
        return len(self.rows)

    @property
    def input_hash(self):
        return hashlib.sha256(self.description.encode()).hexdigest()[:16]

    def table(self):
        return [tuple(r) for r in self.rows]

    def summary(self):
        return {
            "kind": self.kind,
            "bound": self.bound,
            "usable_primes": self.usable,
            "violations": len(self.violations),
            "first_violation": self.first_violation,
            "input_hash": self.input_hash,
        }


# -- per-prime point orders -------------------------------------------------


def _orders_worker(E: CurveOverQ, P: RationalPoint, primes):
    out = []
    for p in primes:
        C = ec.reduce_curve(E, p)
        n = ec.group_order(C)
        rec = ec.point_order(ec.reduce_point(P, E, p), C, annihilator=n)
        out.append((p, n, rec.order))
    return out


def ec_point_orders(E: CurveOverQ, P: RationalPoint, primes, cfg: ScanConfig) -> dict[int, int]:
    """ord(P mod p) for each (good) p, through the cache, in parallel if asked."""
    cache = cfg.cache
    orders: dict[int, int] = {}
    missing = []
    for p in primes:
        rec = cache.get(E.fingerprint, P.fingerprint, p) if cache is not None else None
        if rec is None:
            missing.append(p)
        else:
            orders[p] = rec.point_order
    if not missing:
        return orders
    if cfg.workers > 1 and len(missing) > 1:
        chunks = [missing[i :: cfg.workers] for i in range(cfg.workers)]
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = [r for part in pool.map(_orders_worker, [E] * len(chunks), [P] * len(chunks), chunks) for r in part]
    else:
        results = _orders_worker(E, P, missing)
    results.sort()
    for p, _, m in results:
        orders[p] = m
    if cache is not None:
        cache.put_many(CacheRecord(E.fingerprint, P.fingerprint, p, n, m) for p, n, m in results)
    return orders


def _good_primes(curves, cfg):
    return [p for p in cfg.primes() if all(ec.is_good_prime(E, p) for E in curves)]


def _require_on(E, P, name):
    if not E.contains(P):
        raise InputError(f"{name} {P} is not on {E}: equation residual {E.residual(P)}")


# -- scans ------------------------------------------------------------------


def _rational(v, name):
    try:
        q = Fraction(v)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InputError(f"{name}: not a rational number: {v!r}") from exc
    if q in (0, 1, -1):
        raise InputError(f"{name} must not be 0 or +-1, got {q}")
    return q


def _gm_usable(x: Fraction, y: Fraction, cfg: ScanConfig):
    bad = x.numerator * x.denominator * y.numerator * y.denominator
    return [p for p in cfg.primes() if bad % p]


def _gm_residue(q: Fraction, p: int) -> int:
    return q.numerator * pow(q.denominator, -1, p) % p


def scan_gm(x, y, cfg: ScanConfig) -> DivisibilityReport:
    x, y = _rational(x, "x"), _rational(y, "y")
    rows = []
    for p in _gm_usable(x, y, cfg):
        a = multiplicative_order(_gm_residue(x, p), p)
        b = multiplicative_order(_gm_residue(y, p), p)
        rows.append(ScanRow(p, a, b, a % b == 0))
    desc = f"scan-gm|{x}|{y}|{cfg.bound}|{sorted(cfg.skip)}"
    return DivisibilityReport("scan-gm", desc, cfg.bound, tuple(rows))


def scan_ec(E1: CurveOverQ, P: RationalPoint, E2: CurveOverQ, Q: RationalPoint, cfg: ScanConfig) -> DivisibilityReport:
    _require_on(E1, P, "point")
    _require_on(E2, Q, "point2")
    if P.is_infinity or Q.is_infinity:
        raise InputError("scan points must differ from the identity")
    primes = _good_primes((E1, E2), cfg)
    oP = ec_point_orders(E1, P, primes, cfg)
    oQ = ec_point_orders(E2, Q, primes, cfg)
    rows = tuple(ScanRow(p, oP[p], oQ[p], oP[p] % oQ[p] == 0) for p in primes)
    desc = f"scan-ec|{E1.fingerprint}|{P.fingerprint}|{E2.fingerprint}|{Q.fingerprint}|{cfg.bound}|{sorted(cfg.skip)}"
    return DivisibilityReport("scan-ec", desc, cfg.bound, rows)


# -- multiplier inference ---------------------------------------------------


VERIFIED = "verified"
DISPROVED = "disproved"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class MultiplierCertificate:
    """Outcome of reconstructing n with nP = Q (or m with x^m = y).

    ``verdict`` is one of ``verified`` (exact global check passed),
    ``disproved`` (a reproducible local witness at ``disproof_prime``),
    ``refuted`` (no multiplier of size <= n_bound; no local witness found)
    or ``inconclusive`` (the usable primes never pinned down the residue).
    """

    kind: str
    n_bound: int
    candidate: int | None
    trail: tuple[tuple[int, int, int], ...]
    modulus: int
    verdict: str
    disproof_prime: int | None = None
    reason: str = ""

    columns = ("p", "n_p", "modulus")

    @property
    def verified(self):
        return self.verdict == VERIFIED

    def table(self):
        return list(self.trail)

    def summary(self):
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "candidate": self.candidate,
            "modulus": self.modulus,
            "disproof_prime": self.disproof_prime,
            "reason": self.reason,
        }


def _infer(kind, ordered, local_log, n_bound, verify):
    # ordered: (p, order) pairs in consumption order.
    trail = []
    r, M = 0, 1
    candidate = None
    pending = iter(ordered)
    for p, order in pending:
        n_p = local_log(p, order)
        if n_p is None:
            return MultiplierCertificate(kind, n_bound, None, tuple(trail), M, DISPROVED, p,
                                         f"target not in the cyclic subgroup mod {p}")
        if order == 1:
            continue
        try:
            r, M = crt_combine([(r, M), (n_p, order)])
        except Inconsistent:
            return MultiplierCertificate(kind, n_bound, None, tuple(trail), M, DISPROVED, p,
                                         f"local logarithm mod {p} conflicts with earlier congruences")
        trail.append((p, n_p, order))
        if M > 2 * n_bound:
            candidate = symmetric_residue(r, M)
            break
    if candidate is None:
        return MultiplierCertificate(kind, n_bound, None, tuple(trail), M, INCONCLUSIVE,
                                     reason="combined modulus never exceeded 2*n_bound")
    if verify(candidate):
        return MultiplierCertificate(kind, n_bound, candidate, tuple(trail), M, VERIFIED)
    # No multiplier of size <= n_bound; look for a local witness among the rest.
    for p, order in pending:
        n_p = local_log(p, order)
        if n_p is None:
            return MultiplierCertificate(kind, n_bound, candidate, tuple(trail), M, DISPROVED, p,
                                         f"target not in the cyclic subgroup mod {p}")
        if order > 1:
            try:
                r, M = crt_combine([(r, M), (n_p, order)])
            except Inconsistent:
                return MultiplierCertificate(kind, n_bound, candidate, tuple(trail), M, DISPROVED, p,
                                             f"local logarithm mod {p} conflicts with earlier congruences")
    return MultiplierCertificate(kind, n_bound, candidate, tuple(trail), M, REFUTED,
                                 reason=f"candidate {candidate} fails exact global verification")


def _consumption_order(orders: dict[int, int]):
    return sorted(orders.items(), key=lambda po: (-po[1], po[0]))


def infer_multiplier_gm(x, y, n_bound: int, cfg: ScanConfig) -> MultiplierCertificate:
    x, y = _rational(x, "x"), _rational(y, "y")
    orders = {p: multiplicative_order(_gm_residue(x, p), p) for p in _gm_usable(x, y, cfg)}

    def local_log(p, order):
        return discrete_log_mod(_gm_residue(x, p), _gm_residue(y, p), p, order)

    return _infer("gm", _consumption_order(orders), local_log, n_bound, lambda m: x**m == y)


def verify_global(E: CurveOverQ, P: RationalPoint, Q: RationalPoint, n: int) -> bool:
    return ec.ec_scalar_mul(n, P, E) == Q


def is_non_torsion(E: CurveOverQ, P: RationalPoint, cfg: ScanConfig | None = None) -> bool:
    """Order sample at 12 good primes, then the exact multiples check.

    A rational torsion point keeps its order (at most 12) modulo good odd
    primes, so one sampled order above 16 already proves P has infinite order.
    """
    if P.is_infinity:
        return False
    sample = []
    for p in sieve_primes(2000).primes:
        if ec.is_good_prime(E, p):
            sample.append(p)
            if len(sample) == TORSION_SAMPLE_PRIMES:
                break
    for p in sample:
        C = ec.reduce_curve(E, p)
        if ec.point_order(ec.reduce_point(P, E, p), C).order > TORSION_SAMPLE_THRESHOLD:
            return True
    return not ec.is_torsion(E, P)


def infer_multiplier_ec(E: CurveOverQ, P: RationalPoint, Q: RationalPoint, n_bound: int,
                        cfg: ScanConfig, codomain: CurveOverQ | None = None) -> MultiplierCertificate:
    """Reconstruct n with nP = Q from local discrete logs and CRT.

    With a ``codomain`` different from E, Q lives on another curve: only a
    disproof is possible (a prime where ord Q does not divide ord P rules out
    every isogeny j with j(P) = Q); otherwise the result is inconclusive.
    """
    _require_on(E, P, "point")
    if codomain is not None and codomain != E:
        report = scan_ec(E, P, codomain, Q, cfg)
        p = report.first_violation
        if p is not None:
            row = next(r for r in report.rows if r.p == p)
            return MultiplierCertificate("ec", n_bound, None, (), 1, DISPROVED, p,
                                         f"ord(Q)={row.ord_Q} does not divide ord(P)={row.ord_P} mod {p}")
        return MultiplierCertificate("ec", n_bound, None, (), 1, INCONCLUSIVE,
                                     reason="distinct curves; isogeny search is not attempted")
    _require_on(E, Q, "point2")
    if not is_non_torsion(E, P, cfg):
        raise InputError(f"point {P} is torsion")
    primes = _good_primes((E,), cfg)
    orders = ec_point_orders(E, P, primes, cfg)

    def local_log(p, order):
        C = ec.reduce_curve(E, p)
        Pp, Qp = ec.reduce_point(P, E, p), ec.reduce_point(Q, E, p)
        if order == 1:
            return 0 if Qp is None else None
        return ec.ec_dlog(Pp, Qp, C, order)

    return _infer("ec", _consumption_order(orders), local_log, n_bound,
                  lambda n: verify_global(E, P, Q, n))


# -- homomorphism chains ----------------------------------------------------


@dataclass(frozen=True)
class MultiplyBy:
    n: int


Step = Union[MultiplyBy, Isogeny]


@dataclass(frozen=True)
class HomChain:
    """Steps applied left to right, starting on ``domain``."""

    domain: CurveOverQ
    steps: tuple[Step, ...]

    def __post_init__(self):
        if not self.steps:
            raise InputError("a hom-chain needs at least one step")
        cur = self.domain
        for s in self.steps:
            if isinstance(s, Isogeny):
                if s.domain != cur:
                    raise InputError(f"isogeny domain {s.domain} does not match {cur}")
                cur = s.codomain
            elif not isinstance(s, MultiplyBy):
                raise InputError(f"unknown chain step {s!r}")

    def curves(self):
        out = [self.domain]
        for s in self.steps:
            if isinstance(s, Isogeny):
                out.append(s.codomain)
        return out

    @property
    def codomain(self):
        return self.curves()[-1]

    def degrees(self):
        return [s.degree for s in self.steps if isinstance(s, Isogeny)]

    def apply(self, P: RationalPoint) -> RationalPoint:
        cur_E, cur = self.domain, P
        for s in self.steps:
            if isinstance(s, MultiplyBy):
                cur = ec.ec_scalar_mul(s.n, cur, cur_E)
            else:
                cur = ec.isogeny_eval(s, cur)
                cur_E = s.codomain
        return cur


class SpecializationRow(NamedTuple):
    p: int
    commutes: bool


@dataclass(frozen=True)
class SpecializationReport:
    description: str
    bound: int
    rows: tuple[SpecializationRow, ...]
    skipped: tuple[int, ...]

    columns = ("p", "commutes")

    @property
    def failures(self):
        return [r.p for r in self.rows if not r.commutes]

    @property
    def all_commute(self):
        return not self.failures

    def table(self):
        return [tuple(r) for r in self.rows]

    def summary(self):
        return {
            "kind": "specialize",
            "bound": self.bound,
            "checked_primes": len(self.rows),
            "failures": self.failures,
            "skipped_primes": len(self.skipped),
            "note": "primes dividing any discriminant in the chain or any isogeny degree are skipped",
        }


def _chain_mod_p(chain: HomChain, P: RationalPoint, p: int):
    cur_E = chain.domain
    C = ec.reduce_curve(cur_E, p)
    cur = ec.reduce_point(P, cur_E, p)
    for s in chain.steps:
        if isinstance(s, MultiplyBy):
            cur = ec.ec_scalar_mul(s.n, cur, C)
            continue
        Kp = ec.reduce_point(s.kernel, cur_E, p)
        jp = ec.velu_isogeny(C, Kp)
        target = ec.reduce_curve(s.codomain, p)
        if jp.codomain != target:
            return False, None
        cur = ec.isogeny_eval(jp, cur)
        cur_E, C = s.codomain, target
    return True, cur


def check_specialization(chain: HomChain, P: RationalPoint, cfg: ScanConfig) -> SpecializationReport:
    """Check sp_p(chain(P)) == chain_p(sp_p(P)) at every usable prime.

    The reduced chain is rebuilt independently at each prime: Velu's
    formulas are rerun on the reduced curve with the reduced kernel point.
    """
    _require_on(chain.domain, P, "point")
    image = chain.apply(P)
    final = chain.codomain
    degrees = chain.degrees()
    curves = chain.curves()
    rows, skipped = [], []
    for p in cfg.primes():
        if any(d % p == 0 for d in degrees) or not all(ec.is_good_prime(E, p) for E in curves):
            skipped.append(p)
            continue
        try:
            same_model, local = _chain_mod_p(chain, P, p)
        except ec.IsogenyError:
            skipped.append(p)
            continue
        rows.append(SpecializationRow(p, same_model and local == ec.reduce_point(image, final, p)))
    desc = f"specialize|{chain.domain.fingerprint}|{P.fingerprint}|{chain.steps!r}|{cfg.bound}"
    return SpecializationReport(desc, cfg.bound, tuple(rows), tuple(skipped))
