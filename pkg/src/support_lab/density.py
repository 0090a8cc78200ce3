"""Prime densities of l | ord(P mod p) and of ord(P mod p) coprime to l.

Only nonemptiness of both classes can be asserted at finite scale; the
densities themselves are recorded as pilot regression values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from . import ec_core as ec
from .ec_core import CurveOverQ, RationalPoint
from .modmath import is_probable_prime
from .store import decimal6
from .support import InputError, ScanConfig, _good_primes, _require_on, ec_point_orders, is_non_torsion

CHECKPOINTS = 10
BAND_NOTE = "pilot-derived regression band; no density value is asserted by theory"


class TracePoint(NamedTuple):
    checkpoint: int
    count_div: int
    count_total: int
    density: Fraction | None


class CrossCheckRow(NamedTuple):
    p: int
    ord_shifted: int
    ord_P: int
    holds: bool


@dataclass(frozen=True)
class DensityReport:
    ell: int
    bound: int
    usable: int
    count_div: int
    count_coprime: int
    trace: tuple[TracePoint, ...]
    cross_check: tuple[CrossCheckRow, ...] | None = None

    columns = ("checkpoint", "count_div", "count_total", "density_decimal")

    @property
    def density_div(self):
        return Fraction(self.count_div, self.usable) if self.usable else None

    @property
    def density_coprime(self):
        return Fraction(self.count_coprime, self.usable) if self.usable else None

    @property
    def empty(self):
        return self.usable == 0

    @property
    def cross_check_holds(self):
        if self.cross_check is None:
            return None
        return all(r.holds for r in self.cross_check)

    def table(self):
        return [(t.checkpoint, t.count_div, t.count_total, decimal6(t.density)) for t in self.trace]

    def summary(self):
        out = {
            "kind": "density",
            "ell": self.ell,
            "bound": self.bound,
            "usable_primes": self.usable,
            "count_div": self.count_div,
            "count_coprime": self.count_coprime,
            "density_div": decimal6(self.density_div),
            "density_coprime": decimal6(self.density_coprime),
            "note": BAND_NOTE,
        }
        if self.cross_check is not None:
            out["cross_check_primes"] = len(self.cross_check)
            out["cross_check_holds"] = self.cross_check_holds
        return out


def _classify(orders: dict[int, int], ell: int, bound: int, cross_check=None) -> DensityReport:
    primes = sorted(orders)
    div = [p for p in primes if orders[p] % ell == 0]
    cuts = [bound * i // CHECKPOINTS for i in range(1, CHECKPOINTS + 1)]
    trace = []
    for c in cuts:
        total = sum(1 for p in primes if p <= c)
        d = sum(1 for p in div if p <= c)
        trace.append(TracePoint(c, d, total, Fraction(d, total) if total else None))
    return DensityReport(ell, bound, len(primes), len(div), len(primes) - len(div), tuple(trace), cross_check)


def _check_ell(ell):
    if ell < 2 or not is_probable_prime(ell):
        raise InputError(f"l must be prime, got {ell}")


def density_scan(E: CurveOverQ, P: RationalPoint, ell: int, cfg: ScanConfig) -> DensityReport:
    _check_ell(ell)
    _require_on(E, P, "point")
    if not is_non_torsion(E, P):
        raise InputError(f"point {P} is torsion")
    orders = ec_point_orders(E, P, _good_primes((E,), cfg), cfg)
    return _classify(orders, ell, cfg.bound)


def exact_torsion_order(E: CurveOverQ, R: RationalPoint) -> int | None:
    """Order of R over Q if it is at most 12, else None."""
    cur = R
    for k in range(1, ec.MAZUR_BOUND + 1):
        if cur.is_infinity:
            return k
        cur = ec.rational_add(cur, R, E)
    return None


def torsion_shift_scan(E: CurveOverQ, P: RationalPoint, R: RationalPoint, cfg: ScanConfig) -> DensityReport:
    """Density report for P + R, R of prime order l, with the deduction table.

    At each prime where ord(P + R) is prime to l, the l-parts of ord P and
    ord R must agree, so l divides ord P; ``cross_check`` records this.
    """
    _require_on(E, P, "point")
    _require_on(E, R, "torsion point")
    ell = exact_torsion_order(E, R)
    if ell is None or ell == 1 or not is_probable_prime(ell):
        raise InputError(f"torsion point {R} must have prime order")
    if not is_non_torsion(E, P):
        raise InputError(f"point {P} is torsion")
    S = ec.rational_add(P, R, E)
    primes = _good_primes((E,), cfg)
    oS = ec_point_orders(E, S, primes, cfg)
    oP = ec_point_orders(E, P, primes, cfg)
    rows = tuple(CrossCheckRow(p, oS[p], oP[p], oP[p] % ell == 0) for p in primes if oS[p] % ell)
    return _classify(oS, ell, cfg.bound, rows)
