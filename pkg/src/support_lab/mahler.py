"""A non-polynomial map Z -> Z compatible with every reduction Z -> Z/N.

psi(n) = sum_k a_k n(n-1)...(n-k+1) is a finite sum for each n >= 0, and
phi(n) = psi(n^2).  Since n(n-1)...(n-k+1) = k! * binom(n, k) vanishes mod N
once N | k!, psi mod N is a polynomial function of n mod N, hence so is phi.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

TAIL_KINDS = ("zeros", "constant", "periodic")


class IllDefined(ArithmeticError):
    """The residue table failed its window self-check (implementation fault)."""


@dataclass(frozen=True)
class CoefficientRule:
    head: tuple[int, ...] = ()
    tail: str = "zeros"
    tail_values: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(int(a) for a in self.head))
        object.__setattr__(self, "tail_values", tuple(int(a) for a in self.tail_values))
        if self.tail not in TAIL_KINDS:
            raise ValueError(f"tail must be one of {TAIL_KINDS}")
        if self.tail == "constant" and len(self.tail_values) != 1:
            raise ValueError("constant tail takes exactly one value")
        if self.tail == "periodic" and not self.tail_values:
            raise ValueError("periodic tail needs a nonempty period")

    def __call__(self, k: int) -> int:
        if k < len(self.head):
            return self.head[k]
        if self.tail == "zeros":
            return 0
        if self.tail == "constant":
            return self.tail_values[0]
        return self.tail_values[(k - len(self.head)) % len(self.tail_values)]

    @property
    def finitely_supported(self):
        """True when only finitely many a_k are nonzero (then phi is a polynomial)."""
        return self.tail == "zeros" or not any(self.tail_values)


ALL_ONES = CoefficientRule((1,), "constant", (1,))


@dataclass(frozen=True)
class MahlerMap:
    rule: CoefficientRule = ALL_ONES

    @property
    def genuine_counterexample(self):
        return not self.rule.finitely_supported


def eval_psi(f: MahlerMap, n: int, modulus: int | None = None, terms: int | None = None) -> int:
    """psi(n) exactly, or psi(n) mod ``modulus``.

    ``terms`` truncates the sum after that many terms (any truncation at
    K >= n leaves the value unchanged).
    """
    if n < 0:
        raise ValueError("psi is defined for n >= 0")
    last = n if terms is None else min(n, terms - 1)
    total, ff = 0, 1
    for k in range(last + 1):
        a = f.rule(k)
        if modulus is None:
            total += a * ff
            ff *= n - k
        else:
            total = (total + a * ff) % modulus
            ff = ff * (n - k) % modulus
            if ff == 0:
                break
    return total if modulus is None else total % modulus


def eval_phi(f: MahlerMap, n: int, modulus: int | None = None) -> int:
    return eval_psi(f, n * n, modulus)


def induced_map_mod(f: MahlerMap, N: int, window: int = 3) -> list[int]:
    """Residue table T[r] = phi(r) mod N, self-checked on r + jN for j <= window."""
    if N < 2:
        raise ValueError("N must be at least 2")
    table = [eval_phi(f, r, N) for r in range(N)]
    for r in range(N):
        for j in range(1, window + 1):
            if eval_phi(f, r + j * N, N) != table[r]:
                raise IllDefined(f"phi({r + j * N}) differs from phi({r}) mod {N}")
    return table


def check_commuting_square(f: MahlerMap, N: int, R: int) -> bool:
    """sp_N(phi(n)) == T[sp_N(n)] for all |n| <= R."""
    if R < N:
        raise ValueError("range must be at least N")
    table = induced_map_mod(f, N)
    return all(eval_phi(f, n, N) == table[n % N] for n in range(-R, R + 1))


class Witness(NamedTuple):
    index: int
    difference: int


def forward_differences(values, order: int):
    vals = list(values)
    for _ in range(order):
        vals = [b - a for a, b in zip(vals, vals[1:])]
    return vals


def nonpolynomiality_witness(f: MahlerMap, degree: int, window: int) -> Witness | None:
    """First i with a nonzero (degree+1)-th forward difference of phi on [0, window].

    A nonzero difference shows phi agrees with no polynomial of degree
    <= ``degree`` on the window; None means phi is polynomial there.
    """
    if window < degree + 2:
        raise ValueError("window must be at least degree + 2")
    diffs = forward_differences((eval_phi(f, n) for n in range(window + 1)), degree + 1)
    for i, d in enumerate(diffs):
        if d:
            return Witness(i, d)
    return None


class CommuteRow(NamedTuple):
    N: int
    commutes: bool


@dataclass(frozen=True)
class MahlerReport:
    rule: CoefficientRule
    range: int
    rows: tuple[CommuteRow, ...]
    witnesses: tuple[tuple[int, Witness | None], ...]

    columns = ("N", "commutes")

    def table(self):
        return [tuple(r) for r in self.rows]

    def summary(self):
        return {
            "kind": "mahler",
            "moduli": len(self.rows),
            "all_commute": all(r.commutes for r in self.rows),
            "range": self.range,
            "nonpolynomial_degrees": sum(1 for _, w in self.witnesses if w is not None),
            "degrees_tested": len(self.witnesses),
            "genuine_counterexample": not self.rule.finitely_supported,
        }


def mahler_report(f: MahlerMap, modulus_max: int, R: int, degree_max: int) -> MahlerReport:
    rows = tuple(CommuteRow(N, check_commuting_square(f, N, max(R, N))) for N in range(2, modulus_max + 1))
    wit = tuple((d, nonpolynomiality_witness(f, d, d + 3)) for d in range(degree_max + 1))
    return MahlerReport(f.rule, R, rows, wit)
