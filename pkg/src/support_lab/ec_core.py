"""Elliptic curves over Q and over prime fields.

Curves over Q are kept in long Weierstrass form with integer coefficients.
Reduction at a good prime p > 3 goes straight to the short model
``Y^2 = X^3 - 27 c4 X - 54 c6`` so that all arithmetic mod p is short-form.

Points over F_p are plain tuples ``(x, y)`` of ints in ``[0, p)``; the
identity is ``None``.  Rational points are :class:`RationalPoint` values in
normalized projective coordinates.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .modmath import crt_combine, factorize, is_probable_prime, sqrt_mod

NAIVE_COUNT_CUTOFF = 10**5
PLAIN_BSGS_LIMIT = 10**8
VELU_MAX_DEGREE = 13
MAZUR_BOUND = 12

FpPoint = Union[tuple[int, int], None]


class SingularCurveError(ValueError):
    pass


class NotOnCurveError(ValueError):
    pass


class IsogenyError(ValueError):
    pass


@dataclass(frozen=True)
class CurveOverQ:
    """``y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`` with integer a-invariants."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int

    def __post_init__(self):
        for a in self.ainvs:
            if not isinstance(a, int):
                raise TypeError("curve coefficients must be integers")
        if self.discriminant == 0:
            raise SingularCurveError(f"singular model {list(self.ainvs)}")

    @classmethod
    def from_list(cls, coeffs):
        if len(coeffs) == 2:
            return cls(0, 0, 0, int(coeffs[0]), int(coeffs[1]))
        if len(coeffs) != 5:
            raise ValueError("expected [a1,a2,a3,a4,a6] or [a4,a6]")
        return cls(*(int(c) for c in coeffs))

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def b2(self):
        return self.a1**2 + 4 * self.a2

    @property
    def b4(self):
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self):
        return self.a3**2 + 4 * self.a6

    @property
    def b8(self):
        a1, a2, a3, a4, a6 = self.ainvs
        return a1**2 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3**2 - a4**2

    @property
    def c4(self):
        return self.b2**2 - 24 * self.b4

    @property
    def c6(self):
        return -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6

    @property
    def fingerprint(self):
        return ",".join(str(a) for a in self.ainvs)

    def residual(self, P: "RationalPoint") -> int:
        """Homogenized equation evaluated at P; zero iff P is on the curve."""
        a1, a2, a3, a4, a6 = self.ainvs
        X, Y, Z = P.X, P.Y, P.Z
        lhs = Y * Y * Z + a1 * X * Y * Z + a3 * Y * Z * Z
        rhs = X**3 + a2 * X * X * Z + a4 * X * Z * Z + a6 * Z**3
        return lhs - rhs

    def contains(self, P: "RationalPoint") -> bool:
        return self.residual(P) == 0

    def __str__(self):
        return f"E[{self.fingerprint}]"


@dataclass(frozen=True)
class RationalPoint:
    """Projective point (X:Y:Z) with gcd 1 and a fixed sign convention."""

    X: int
    Y: int
    Z: int

    def __post_init__(self):
        X, Y, Z = self.X, self.Y, self.Z
        g = math.gcd(math.gcd(X, Y), Z)
        if g == 0:
            raise ValueError("(0:0:0) is not a projective point")
        sign = -1 if (Z < 0 or (Z == 0 and (Y < 0 or (Y == 0 and X < 0)))) else 1
        object.__setattr__(self, "X", sign * X // g)
        object.__setattr__(self, "Y", sign * Y // g)
        object.__setattr__(self, "Z", sign * Z // g)

    @classmethod
    def from_affine(cls, x, y):
        x, y = Fraction(x), Fraction(y)
        z = math.lcm(x.denominator, y.denominator)
        return cls(int(x * z), int(y * z), z)

    @classmethod
    def from_list(cls, coords):
        if len(coords) == 2:
            return cls.from_affine(Fraction(coords[0]), Fraction(coords[1]))
        return cls(*(int(c) for c in coords))

    @property
    def is_infinity(self):
        return self.Z == 0

    def affine(self):
        if self.Z == 0:
            return None
        return Fraction(self.X, self.Z), Fraction(self.Y, self.Z)

    @property
    def fingerprint(self):
        return f"{self.X}:{self.Y}:{self.Z}"

    def __str__(self):
        if self.Z == 0:
            return "O"
        x, y = self.affine()
        return f"({x}, {y})"


INFINITY = RationalPoint(0, 1, 0)


def _check_on(E, P):
    if not E.contains(P):
        raise NotOnCurveError(f"point {P} is not on {E} (residual {E.residual(P)})")


@dataclass(frozen=True)
class ReducedCurve:
    """Short model ``y^2 = x^3 + A x + B`` over F_p."""

    p: int
    A: int
    B: int

    def __post_init__(self):
        object.__setattr__(self, "A", self.A % self.p)
        object.__setattr__(self, "B", self.B % self.p)
        if (4 * self.A**3 + 27 * self.B**2) % self.p == 0:
            raise SingularCurveError(f"singular short model mod {self.p}")

    def contains(self, P: FpPoint) -> bool:
        if P is None:
            return True
        x, y = P
        p = self.p
        return (y * y - (x * x * x + self.A * x + self.B)) % p == 0

    def points(self):
        """All points, identity first (exhaustive; small p only)."""
        p = self.p
        roots = {}
        for y in range(p):
            roots.setdefault(y * y % p, []).append(y)
        out: list[FpPoint] = [None]
        for x in range(p):
            for y in roots.get((x * x * x + self.A * x + self.B) % p, ()):
                out.append((x, y))
        return out

    def random_point(self, rng: random.Random) -> tuple[int, int]:
        p = self.p
        while True:
            x = rng.randrange(p)
            y = sqrt_mod(x * x * x + self.A * x + self.B, p)
            if y is not None:
                return (x, y if rng.random() < 0.5 else (-y) % p)

    def twist(self):
        """Quadratic twist by the least non-residue."""
        p = self.p
        d = 2
        while pow(d, (p - 1) // 2, p) != p - 1:
            d += 1
        return ReducedCurve(p, self.A * d * d, self.B * d * d * d)


def is_good_prime(E: CurveOverQ, p: int) -> bool:
    return p > 3 and E.discriminant % p != 0


def reduce_curve(E: CurveOverQ, p: int) -> ReducedCurve | None:
    """Short model of E mod p, or None at p <= 3 and at primes dividing the discriminant."""
    if not is_good_prime(E, p):
        return None
    return ReducedCurve(p, -27 * E.c4, -54 * E.c6)


def reduce_point(P: RationalPoint, E: CurveOverQ, p: int) -> FpPoint:
    if P.Z % p == 0:
        return None
    zi = pow(P.Z, -1, p)
    x = P.X * zi % p
    y = P.Y * zi % p
    return ((36 * x + 3 * E.b2) % p, 108 * (2 * y + E.a1 * x + E.a3) % p)


# -- group law over F_p (short form) ---------------------------------------


def fp_neg(P: FpPoint, C: ReducedCurve) -> FpPoint:
    if P is None:
        return None
    return (P[0], (-P[1]) % C.p)


def ec_add(U: FpPoint, V: FpPoint, C: ReducedCurve) -> FpPoint:
    if U is None:
        return V
    if V is None:
        return U
    p = C.p
    x1, y1 = U
    x2, y2 = V
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + C.A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _fp_mul(n: int, P: FpPoint, C: ReducedCurve) -> FpPoint:
    if n < 0:
        n, P = -n, fp_neg(P, C)
    R = None
    while n:
        if n & 1:
            R = ec_add(R, P, C)
        P = ec_add(P, P, C)
        n >>= 1
    return R


# -- group law over a generic field (long form) ----------------------------


def _long_neg(a, P):
    if P is None:
        return None
    x, y = P
    return (x, -y - a[0] * x - a[2])


def _long_add(a, P, Q):
    if P is None:
        return Q
    if Q is None:
        return P
    a1, a2, a3, a4, a6 = a
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        den = 2 * y1 + a1 * x1 + a3
        if y1 + y2 + a1 * x2 + a3 == 0:
            return None
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / den
        nu = (-(x1**3) + a4 * x1 + 2 * a6 - a3 * y1) / den
    else:
        lam = (y2 - y1) / (x2 - x1)
        nu = (y1 * x2 - y2 * x1) / (x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    return (x3, -(lam + a1) * x3 - nu - a3)


def _long_mul(a, n, P):
    if n < 0:
        n, P = -n, _long_neg(a, P)
    R = None
    while n:
        if n & 1:
            R = _long_add(a, R, P)
        P = _long_add(a, P, P)
        n >>= 1
    return R


def _from_affine_q(P):
    return INFINITY if P is None else RationalPoint.from_affine(*P)


def rational_add(U: RationalPoint, V: RationalPoint, E: CurveOverQ) -> RationalPoint:
    _check_on(E, U)
    _check_on(E, V)
    a = tuple(Fraction(c) for c in E.ainvs)
    return _from_affine_q(_long_add(a, U.affine(), V.affine()))


def rational_neg(P: RationalPoint, E: CurveOverQ) -> RationalPoint:
    a = tuple(Fraction(c) for c in E.ainvs)
    return _from_affine_q(_long_neg(a, P.affine()))


def ec_scalar_mul(n: int, P, curve):
    """[n]P over F_p (short form) or over Q (exact rational arithmetic)."""
    if isinstance(curve, ReducedCurve):
        return _fp_mul(n, P, curve)
    _check_on(curve, P)
    a = tuple(Fraction(c) for c in curve.ainvs)
    return _from_affine_q(_long_mul(a, n, P.affine()))


def is_torsion(E: CurveOverQ, P: RationalPoint) -> bool:
    """Exact check: a rational torsion point has order at most 12 (Mazur)."""
    a = tuple(Fraction(c) for c in E.ainvs)
    Pa = P.affine()
    R = Pa
    for _ in range(MAZUR_BOUND):
        if R is None:
            return True
        R = _long_add(a, R, Pa)
    return False


# -- orders ----------------------------------------------------------------


def hasse_interval(p: int) -> tuple[int, int]:
    r = math.isqrt(4 * p)  # floor(2 sqrt p)
    return p + 1 - r, p + 1 + r


def _count_naive(C: ReducedCurve) -> int:
    p = C.p
    if p < 3_000_000:
        xs = np.arange(p, dtype=np.int64)
        f = (xs * xs % p * xs + C.A * xs + C.B) % p
        is_sq = np.zeros(p, dtype=bool)
        is_sq[xs * xs % p] = True
        zeros = int(np.count_nonzero(f == 0))
        nonzero_squares = int(np.count_nonzero(is_sq[f])) - zeros
        return 1 + zeros + 2 * nonzero_squares
    total = p + 1
    for x in range(p):
        v = (x * x * x + C.A * x + C.B) % p
        if v:
            total += 1 if pow(v, (p - 1) // 2, p) == 1 else -1
    return total


def _hasse_annihilator(P: FpPoint, C: ReducedCurve) -> int:
    """Some m in the Hasse interval with m P = O, by baby-step giant-step."""
    lo, hi = hasse_interval(C.p)
    s = math.isqrt(hi - lo) + 1
    baby = {}
    R = None
    for j in range(s):
        baby.setdefault(R, j)
        R = ec_add(R, P, C)
    step = _fp_mul(s, P, C)
    G = _fp_mul(lo, P, C)
    for i in range(s + 1):
        j = baby.get(fp_neg(G, C), None)
        if j is not None:
            return lo + i * s + j
        G = ec_add(G, step, C)
    raise ArithmeticError(f"no annihilator in Hasse interval mod {C.p}")


def _exact_order_from(m: int, P: FpPoint, C: ReducedCurve) -> int:
    for q, _ in factorize(m).factors:
        while m % q == 0 and _fp_mul(m // q, P, C) is None:
            m //= q
    return m


def _count_annihilator(C: ReducedCurve, max_rounds: int = 40) -> int | None:
    p = C.p
    lo, hi = hasse_interval(p)
    rng = random.Random(p * 1_000_003 + C.A * 1009 + C.B)
    T = C.twist()
    L = Lt = 1
    for _ in range(max_rounds):
        R = C.random_point(rng)
        L = math.lcm(L, _exact_order_from(_hasse_annihilator(R, C), R, C))
        Rt = T.random_point(rng)
        Lt = math.lcm(Lt, _exact_order_from(_hasse_annihilator(Rt, T), Rt, T))
        start = -(-lo // L) * L
        cands = [N for N in range(start, hi + 1, L) if (2 * p + 2 - N) % Lt == 0]
        if len(cands) == 1:
            return cands[0]
    return None


@lru_cache(maxsize=65536)
def group_order(C: ReducedCurve, method: str = "auto", cutoff: int = NAIVE_COUNT_CUTOFF) -> int:
    """#E(F_p): character sum for p <= cutoff, annihilator search above.

    The annihilator search intersects the lattice of annihilators of random
    points on the curve and its quadratic twist until one Hasse-interval
    value remains.  If that fails to isolate a value (only possible for very
    small p) the character sum is used.
    """
    if method not in ("auto", "naive", "annihilator"):
        raise ValueError(f"unknown method {method!r}")
    if method == "naive" or (method == "auto" and C.p <= cutoff):
        return _count_naive(C)
    N = _count_annihilator(C)
    return _count_naive(C) if N is None else N


@dataclass(frozen=True)
class PointOrderRecord:
    p: int
    annihilator: int
    order: int
    factorization: tuple[tuple[int, int], ...]


def point_order(P: FpPoint, C: ReducedCurve, annihilator: int | None = None) -> PointOrderRecord:
    if annihilator is None:
        if C.p <= NAIVE_COUNT_CUTOFF:
            annihilator = group_order(C)
        else:
            annihilator = _hasse_annihilator(P, C) if P is not None else C.p + 1
    if _fp_mul(annihilator, P, C) is not None:
        raise ArithmeticError("supplied annihilator does not kill the point")
    order = _exact_order_from(annihilator, P, C)
    return PointOrderRecord(C.p, annihilator, order, factorize(order).factors)


# -- discrete logarithms ---------------------------------------------------


def _bsgs(P, Q, n, C):
    m = math.isqrt(n) + 1
    baby = {}
    R = None
    for j in range(m):
        baby.setdefault(R, j)
        R = ec_add(R, P, C)
    giant = fp_neg(_fp_mul(m, P, C), C)
    G = Q
    for i in range(m + 1):
        j = baby.get(G)
        if j is not None:
            return (i * m + j) % n
        G = ec_add(G, giant, C)
    return None


def ec_dlog(P: FpPoint, Q: FpPoint, C: ReducedCurve, order: int | None = None) -> int | None:
    """Least n in [0, ord P) with nP = Q, or None when Q is not in <P>."""
    if P is None:
        raise ValueError("discrete log base must not be the identity")
    n = point_order(P, C).order if order is None else order
    if n < PLAIN_BSGS_LIMIT:
        return _bsgs(P, Q, n, C)
    # Pohlig-Hellman over the prime-power parts of n.
    if _fp_mul(n, Q, C) is not None:
        return None
    congruences = []
    for q, e in factorize(n).factors:
        qe = q**e
        cof = n // qe
        Pq, Qq = _fp_mul(cof, P, C), _fp_mul(cof, Q, C)
        gamma = _fp_mul(q ** (e - 1), Pq, C)
        x = 0
        for k in range(e):
            h = _fp_mul(q ** (e - 1 - k), ec_add(Qq, fp_neg(_fp_mul(x, Pq, C), C), C), C)
            d = _bsgs(gamma, h, q, C)
            if d is None:
                return None
            x += d * q**k
        congruences.append((x, qe))
    x, _ = crt_combine(congruences)
    return x if _fp_mul(x, P, C) == Q else None


# -- isogenies -------------------------------------------------------------


class _Fp:
    """Minimal prime-field element so the long-form formulas run over F_p."""

    __slots__ = ("v", "p")

    def __init__(self, v, p):
        self.v = v % p
        self.p = p

    def _c(self, o):
        return o.v if isinstance(o, _Fp) else o

    def __add__(self, o):
        return _Fp(self.v + self._c(o), self.p)

    __radd__ = __add__

    def __sub__(self, o):
        return _Fp(self.v - self._c(o), self.p)

    def __rsub__(self, o):
        return _Fp(self._c(o) - self.v, self.p)

    def __mul__(self, o):
        return _Fp(self.v * self._c(o), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return _Fp(-self.v, self.p)

    def __truediv__(self, o):
        return _Fp(self.v * pow(self._c(o), -1, self.p), self.p)

    def __rtruediv__(self, o):
        return _Fp(self._c(o) * pow(self.v, -1, self.p), self.p)

    def __pow__(self, e):
        return _Fp(pow(self.v, e, self.p), self.p)

    def __eq__(self, o):
        return (self.v - self._c(o)) % self.p == 0

    def __hash__(self):
        return hash(self.v)


@dataclass(frozen=True)
class Isogeny:
    """Separable isogeny with cyclic kernel, built from Velu's formulas.

    ``data`` holds one tuple ``(xQ, yQ, gxQ, gyQ, uQ, vQ)`` per point of the
    kernel's half-set S (2-torsion plus one of each +-pair).
    """

    domain: Union[CurveOverQ, ReducedCurve]
    codomain: Union[CurveOverQ, ReducedCurve]
    degree: int
    kernel: Union[RationalPoint, FpPoint]
    data: tuple = field(repr=False)
    kernel_x: frozenset = field(repr=False)


def _field_ainvs(curve):
    if isinstance(curve, ReducedCurve):
        p = curve.p
        return tuple(_Fp(c, p) for c in (0, 0, 0, curve.A, curve.B))
    return tuple(Fraction(c) for c in curve.ainvs)


def _to_field_point(curve, P):
    if isinstance(curve, ReducedCurve):
        return None if P is None else (_Fp(P[0], curve.p), _Fp(P[1], curve.p))
    return P.affine()


def _from_field_point(curve, P):
    if isinstance(curve, ReducedCurve):
        return None if P is None else (P[0].v, P[1].v)
    return _from_affine_q(P)


def velu_isogeny(E, K) -> Isogeny:
    """Isogeny with kernel <K> for K of prime order l <= 13 defined over the base field."""
    if isinstance(E, CurveOverQ):
        _check_on(E, K)
    elif not E.contains(K):
        raise NotOnCurveError(f"kernel point {K} is not on the curve mod {E.p}")
    a = _field_ainvs(E)
    a1, a2, a3, a4, a6 = a
    Kf = _to_field_point(E, K)
    if Kf is None:
        raise IsogenyError("kernel generator is the identity")
    multiples = [Kf]
    while True:
        nxt = _long_add(a, multiples[-1], Kf)
        if nxt is None:
            break
        multiples.append(nxt)
        if len(multiples) > VELU_MAX_DEGREE:
            raise IsogenyError(f"kernel point order exceeds {VELU_MAX_DEGREE}")
    ell = len(multiples) + 1
    if not is_probable_prime(ell):
        raise IsogenyError(f"kernel point has composite order {ell}")
    half = multiples if ell == 2 else multiples[: (ell - 1) // 2]
    xs = [Q[0] for Q in half]
    if len({(x.v if isinstance(x, _Fp) else x) for x in xs}) != len(xs):
        raise IsogenyError("kernel half-set has repeated x-coordinates")
    b2 = a1 * a1 + 4 * a2
    data = []
    v = w = 0 * a1
    for xQ, yQ in half:
        gx = 3 * xQ * xQ + 2 * a2 * xQ + a4 - a1 * yQ
        gy = -2 * yQ - a1 * xQ - a3
        vQ = gx if ell == 2 else 2 * gx - a1 * gy
        uQ = gy * gy
        v = v + vQ
        w = w + uQ + xQ * vQ
        data.append((xQ, yQ, gx, gy, uQ, vQ))
    A4 = a4 - 5 * v
    A6 = a6 - b2 * v - 7 * w
    if isinstance(E, ReducedCurve):
        codomain = ReducedCurve(E.p, A4.v, A6.v)
    else:
        coeffs = (a1, a2, a3, A4, A6)
        if any(c.denominator != 1 for c in coeffs):
            raise IsogenyError("codomain model is not integral")
        codomain = CurveOverQ(*(int(c) for c in coeffs))
    kx = frozenset((x.v if isinstance(x, _Fp) else x) for x in xs)
    return Isogeny(E, codomain, ell, K, tuple(data), kx)


def isogeny_eval(j: Isogeny, P):
    if isinstance(j.domain, CurveOverQ):
        if not isinstance(P, RationalPoint):
            raise TypeError("expected a rational point")
        _check_on(j.domain, P)
    Pf = _to_field_point(j.domain, P)
    if Pf is None:
        return _from_field_point(j.codomain, None)
    x, y = Pf
    if (x.v if isinstance(x, _Fp) else x) in j.kernel_x:
        return _from_field_point(j.codomain, None)
    a1, _, a3, _, _ = _field_ainvs(j.domain)
    X, Y = x, y
    for xQ, yQ, gx, gy, uQ, vQ in j.data:
        t = 1 / (x - xQ)
        t2 = t * t
        X = X + vQ * t + uQ * t2
        Y = Y - (uQ * (2 * y + a1 * x + a3) * t2 * t
                 + vQ * (a1 * (x - xQ) + y - yQ) * t2
                 + (a1 * uQ - gx * gy) * t2)
    return _from_field_point(j.codomain, (X, Y))
