"""Integer and modular arithmetic kernel: sieving, factoring, CRT, residues."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TRIAL_CUTOFF = 10**6
MAX_FACTOR_INPUT = 2**128

# First 13 primes: deterministic strong-pseudoprime test below this bound.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_BOUND = 3317044064679887385961981
_MR_EXTRA_BASES = (43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)


class EmptyDomainError(ValueError):
    pass


class NotInvertible(ArithmeticError):
    def __init__(self, a, m):
        super().__init__(f"{a} is not invertible modulo {m}")
        self.a = a
        self.m = m


class Inconsistent(ArithmeticError):
    """Raised when a congruence system has no solution."""


@dataclass(frozen=True)
class PrimeTable:
    bound: int
    primes: tuple[int, ...]

    def __iter__(self):
        return iter(self.primes)

    def __len__(self):
        return len(self.primes)

    def between(self, lo, hi):
        """Primes p with lo <= p <= hi."""
        return [p for p in self.primes if lo <= p <= hi]


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    @property
    def primes(self):
        return [q for q, _ in self.factors]

    def product(self):
        out = 1
        for q, e in self.factors:
            out *= q**e
        return out


@dataclass(frozen=True)
class CongruenceSystem:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for r, m in self.pairs:
            if m < 2 or not 0 <= r < m:
                raise ValueError(f"bad congruence {r} mod {m}")


@lru_cache(maxsize=8)
def sieve_primes(bound: int) -> PrimeTable:
    if bound < 2:
        raise EmptyDomainError(f"no primes below {bound}")
    flags = np.ones(bound + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, math.isqrt(bound) + 1):
        if flags[q]:
            flags[q * q :: q] = False
    return PrimeTable(bound, tuple(int(p) for p in np.flatnonzero(flags)))


def is_probable_prime(n: int) -> bool:
    """Strong pseudoprime test; deterministic for n < 3.3e24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _MR_BASES if n < _MR_DETERMINISTIC_BOUND else _MR_BASES + _MR_EXTRA_BASES
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _rho(n: int, rng: random.Random) -> int:
    # Brent's cycle variant; n odd composite, not a perfect power of a small prime.
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> Factorization:
    if n < 1:
        raise ValueError("factorize expects a positive integer")
    if n > MAX_FACTOR_INPUT:
        raise ValueError("input exceeds the 128-bit factoring bound")
    counts: dict[int, int] = {}
    rest = n
    for q in sieve_primes(1000).primes:
        if rest % q == 0:
            e = 0
            while rest % q == 0:
                rest //= q
                e += 1
            counts[q] = e
    q = 1001
    while rest > 1 and q * q <= rest and q < TRIAL_CUTOFF:
        if rest % q == 0:
            counts[q] = counts.get(q, 0) + 1
            rest //= q
        else:
            q += 2
    if rest > 1:
        rng = random.Random(0x5EED)
        stack = [rest]
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if is_probable_prime(m):
                counts[m] = counts.get(m, 0) + 1
                continue
            r = math.isqrt(m)
            if r * r == m:
                stack += [r, r]
                continue
            d = _rho(m, rng)
            stack += [d, m // d]
    return Factorization(n, tuple(sorted(counts.items())))


def crt_combine(system: CongruenceSystem | list[tuple[int, int]]) -> tuple[int, int]:
    """Solve x = r_i (mod m_i) for arbitrary (not necessarily coprime) moduli.

    Returns ``(x, lcm)`` with ``0 <= x < lcm``; raises :class:`Inconsistent`.
    """
    pairs = system.pairs if isinstance(system, CongruenceSystem) else system
    r, m = 0, 1
    for r2, m2 in pairs:
        g = math.gcd(m, m2)
        if (r2 - r) % g:
            raise Inconsistent(f"{r2} mod {m2} conflicts with {r} mod {m}")
        step = (r2 - r) // g * pow(m // g, -1, m2 // g) % (m2 // g) if m2 // g > 1 else 0
        r += m * step
        m = m // g * m2
        r %= m
    return r, m


def mod_inv(a: int, m: int) -> int:
    if m < 2:
        raise ValueError("modulus must be at least 2")
    try:
        return pow(a, -1, m)
    except ValueError:
        raise NotInvertible(a, m) from None


def legendre(a: int, p: int) -> int:
    if p < 3 or p % 2 == 0 or not is_probable_prime(p):
        raise ValueError(f"legendre symbol needs an odd prime, got {p}")
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a modulo the odd prime p, or None (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def is_squarefree(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n).factors)


def symmetric_residue(r: int, m: int) -> int:
    """Representative of r mod m in (-m/2, m/2]."""
    r %= m
    return r - m if 2 * r > m else r


def multiplicative_order(a: int, p: int, group_order: int | None = None) -> int:
    """Order of a in (Z/p)^*; ``group_order`` defaults to p - 1 (p prime)."""
    a %= p
    if a == 0:
        raise ValueError("0 has no multiplicative order")
    n = p - 1 if group_order is None else group_order
    for q, _ in factorize(n).factors:
        while n % q == 0 and pow(a, n // q, p) == 1:
            n //= q
    return n


def discrete_log_mod(g: int, h: int, p: int, order: int | None = None) -> int | None:
    """Least k in [0, ord g) with g^k = h mod p, or None if h is not in <g>."""
    g %= p
    h %= p
    n = multiplicative_order(g, p) if order is None else order
    m = math.isqrt(n) + 1
    baby = {}
    e = 1
    for j in range(m):
        baby.setdefault(e, j)
        e = e * g % p
    giant = pow(g, -m, p)
    t = h
    for i in range(m + 1):
        j = baby.get(t)
        if j is not None:
            return (i * m + j) % n
        t = t * giant % p
    return None
