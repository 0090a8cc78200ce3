"""SL2 over Z/m for squarefree m: unipotent factorizations, elementary
words, CRT splitting, and the order/conjugacy censuses over small fields.

A product ring of prime fields is represented as Z/m with m the product of
the primes.  Homomorphism enumeration is not attempted; only the generation
and order-theoretic ingredients are computed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .modmath import NotInvertible, crt_combine, factorize, is_probable_prime, mod_inv

EXHAUSTIVE_UNIPOTENT_MAX = 23
EXHAUSTIVE_CENSUS_MAX = 13
UPPER, LOWER = "upper", "lower"
WORD_PATTERN = (UPPER, LOWER, UPPER, LOWER, UPPER)


class DomainError(ValueError):
    pass


class Unsupported(ValueError):
    pass


@dataclass(frozen=True)
class Mat2ModM:
    m: int
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("modulus must be at least 2")
        for name in "abcd":
            object.__setattr__(self, name, getattr(self, name) % self.m)

    @classmethod
    def identity(cls, m):
        return cls(m, 1, 0, 0, 1)

    @classmethod
    def from_rows(cls, rows, m):
        (a, b), (c, d) = rows
        return cls(m, a, b, c, d)

    def rows(self):
        return ((self.a, self.b), (self.c, self.d))

    @property
    def det(self):
        return (self.a * self.d - self.b * self.c) % self.m

    @property
    def trace(self):
        return (self.a + self.d) % self.m

    def in_sl2(self):
        return self.det == 1

    def __matmul__(self, o: "Mat2ModM") -> "Mat2ModM":
        if o.m != self.m:
            raise ValueError("moduli differ")
        return Mat2ModM(self.m,
                        self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                        self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def inverse(self):
        di = mod_inv(self.det, self.m)
        return Mat2ModM(self.m, self.d * di, -self.b * di, -self.c * di, self.a * di)

    def __pow__(self, k: int) -> "Mat2ModM":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = Mat2ModM.identity(self.m)
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def is_unitriangular(self):
        return self.a == 1 and self.d == 1 and (self.b == 0 or self.c == 0)


def upper(x: int, m: int) -> Mat2ModM:
    return Mat2ModM(m, 1, x, 0, 1)


def lower(x: int, m: int) -> Mat2ModM:
    return Mat2ModM(m, 1, 0, x, 1)


def diag(x: int, y: int, m: int) -> Mat2ModM:
    return Mat2ModM(m, x, 0, 0, y)


def deligne_factorization(a: int, m: int) -> tuple[Mat2ModM, Mat2ModM, Mat2ModM, Mat2ModM]:
    """Four unitriangular factors whose product is diag(1/a, a)."""
    try:
        ai = mod_inv(a, m)
    except NotInvertible as exc:
        raise DomainError(f"{a} is not a unit modulo {m}") from exc
    return (upper(-ai, m), lower(a - 1, m), upper(1, m), lower(-(a - 1) * ai, m))


def product(mats) -> Mat2ModM:
    mats = list(mats)
    out = mats[0]
    for g in mats[1:]:
        out = out @ g
    return out


@dataclass(frozen=True)
class ElementaryWord:
    m: int
    letters: tuple[tuple[str, int], ...]

    def evaluate(self) -> Mat2ModM:
        out = Mat2ModM.identity(self.m)
        for side, x in self.letters:
            out = out @ (upper(x, self.m) if side == UPPER else lower(x, self.m))
        return out


def _prime_factors(m: int, allow_small_primes: bool, warn: bool = True) -> list[int]:
    fac = factorize(m).factors
    if any(e > 1 for _, e in fac):
        raise Unsupported(f"modulus {m} is not squarefree")
    primes = [q for q, _ in fac]
    if any(q <= 3 for q in primes):
        if not allow_small_primes:
            raise Unsupported(f"modulus {m} has a prime factor <= 3; pass allow_small_primes=True")
        if warn:
            warnings.warn(f"modulus {m} includes the degenerate primes 2 or 3", stacklevel=3)
    return primes


def _word_params_mod_p(g, p):
    a, b, c, d = g.a % p, g.b % p, g.c % p, g.d % p
    if c:
        ci = pow(c, -1, p)
        return [(a - 1) * ci % p, c, (d - 1) * ci % p, 0, 0]
    # c = 0: right-multiplying by L(-1) makes the lower-left entry -d, a unit.
    a2, c2, d2 = (a - b) % p, (-d) % p, d
    ci = pow(c2, -1, p)
    return [(a2 - 1) * ci % p, c2, (d2 - 1) * ci % p, 1, 0]


def elementary_decomposition(g: Mat2ModM, allow_small_primes: bool = False) -> ElementaryWord:
    """Write g as U(t1) L(t2) U(t3) L(t4) U(t5), solving per prime and
    recombining each parameter by CRT."""
    if not g.in_sl2():
        raise DomainError(f"determinant {g.det} is not 1 modulo {g.m}")
    primes = _prime_factors(g.m, allow_small_primes)
    per_prime = [_word_params_mod_p(g, p) for p in primes]
    params = [crt_combine([(ps[i], p) for ps, p in zip(per_prime, primes)])[0] for i in range(5)]
    return ElementaryWord(g.m, tuple(zip(WORD_PATTERN, params)))


def crt_split(g: Mat2ModM) -> list[Mat2ModM]:
    """Entrywise projections onto Z/p for the primes p | m, ascending."""
    primes = _prime_factors(g.m, allow_small_primes=True, warn=False)
    return [Mat2ModM(p, g.a, g.b, g.c, g.d) for p in primes]


def crt_join(parts: list[Mat2ModM]) -> Mat2ModM:
    entries = []
    for name in "abcd":
        r, m = crt_combine([(getattr(h, name), h.m) for h in parts])
        entries.append(r)
    return Mat2ModM(m, *entries)


# -- exhaustive censuses over SL2(F_q) ------------------------------------


def sl2_elements(q: int) -> Iterator[Mat2ModM]:
    for a in range(q):
        for b in range(q):
            for c in range(q):
                if a:
                    d = (1 + b * c) * pow(a, -1, q) % q
                    yield Mat2ModM(q, a, b, c, d)
                elif (-b * c) % q == 1:
                    # a = 0 forces bc = -1 and leaves d free
                    for d in range(q):
                        yield Mat2ModM(q, 0, b, c, d)


def _require_prime(q, lo, hi):
    if not is_probable_prime(q) or q < lo:
        raise DomainError(f"{q} is not a prime >= {lo}")
    if q > hi:
        raise Unsupported(f"q = {q} exceeds the exhaustive range {hi}")


def conjugacy_class(g: Mat2ModM) -> frozenset:
    return frozenset((h @ g @ h.inverse()) for h in sl2_elements(g.m))


def unipotent_power_conjugacy_count(p: int) -> int:
    """#{k in 1..p-1 : u^k is conjugate to u} for u = U(1) in SL2(F_p)."""
    _require_prime(p, 3, EXHAUSTIVE_UNIPOTENT_MAX)
    u = upper(1, p)
    cls = conjugacy_class(u)
    return sum(1 for k in range(1, p) if upper(k, p) in cls)


def element_order(g: Mat2ModM) -> int:
    k, cur = 1, g
    ident = Mat2ModM.identity(g.m)
    while cur != ident:
        cur = cur @ g
        k += 1
    return k


def semisimple_power_conjugacy_count(s: Mat2ModM) -> int:
    """#{k in 1..ord(s) : s^k conjugate to s}; at most |W| = 2 in SL2."""
    q = s.m
    _require_prime(q, 3, EXHAUSTIVE_CENSUS_MAX)
    if not s.in_sl2():
        raise DomainError("matrix is not in SL2")
    if (s.trace * s.trace - 4) % q == 0:
        raise DomainError("matrix is central or not semisimple (repeated eigenvalue)")
    cls = conjugacy_class(s)
    n = element_order(s)
    return sum(1 for k in range(1, n + 1) if s**k in cls)


@lru_cache(maxsize=None)
def order_census(q: int) -> dict[int, int]:
    """Element order -> number of elements of SL2(F_q) with that order."""
    _require_prime(q, 2, EXHAUSTIVE_CENSUS_MAX)
    out: dict[int, int] = {}
    for g in sl2_elements(q):
        n = element_order(g)
        out[n] = out.get(n, 0) + 1
    return dict(sorted(out.items()))


def has_element_of_order(q: int, n: int) -> bool:
    return n in order_census(q)


@dataclass(frozen=True)
class CensusTable:
    """Order census rows (q, element_order, count) for export."""

    rows: tuple[tuple[int, int, int], ...]

    columns = ("q", "element_order", "count")

    def table(self):
        return list(self.rows)

    def summary(self):
        qs = sorted({r[0] for r in self.rows})
        return {
            "kind": "sl2",
            "fields": qs,
            "unipotent_power_conjugacy": {q: unipotent_power_conjugacy_count(q) for q in qs if q > 2},
            "note": "homomorphism enumeration is not attempted; generation and order data only",
        }


def census_table(qs) -> CensusTable:
    rows = []
    for q in sorted(qs):
        rows.extend((q, n, c) for n, c in order_census(q).items())
    return CensusTable(tuple(rows))
