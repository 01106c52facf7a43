"""Arithmetic in GF(2^t) for small odd t, backed by log/antilog tables."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

DEFAULT_POLYS = {3: 0b1011, 5: 0b100101, 7: 0b10000011}


def _poly_mod(a: int, b: int) -> int:
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for f in range(1 << d, 1 << (d + 1)):
            if _poly_mod(poly, f) == 0:
                return False
    return True


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class FieldParams:
    t: int
    poly: int = 0

    def __post_init__(self):
        if self.t % 2 == 0 or not 3 <= self.t <= 7:
            raise FieldError(f"t must be odd with 3 <= t <= 7, got {self.t}")
        if self.poly == 0:
            object.__setattr__(self, "poly", DEFAULT_POLYS[self.t])
        if self.poly.bit_length() - 1 != self.t:
            raise FieldError(f"polynomial {self.poly:#b} does not have degree {self.t}")
        if not is_irreducible(self.poly):
            raise FieldError(f"polynomial {self.poly:#b} is reducible over GF(2)")

    @property
    def q(self) -> int:
        return 1 << self.t


@dataclass(frozen=True)
class GF:
    """GF(2^t) with precomputed tables; elements are ints in [0, 2^t).

    Tables are built once per parameter set (see :func:`gf`) and never mutated.
    """

    params: FieldParams
    exp: tuple = field(repr=False)
    log: tuple = field(repr=False)
    cubes: tuple = field(repr=False)

    @classmethod
    def build(cls, params: FieldParams) -> "GF":
        q = params.q
        order = q - 1
        # exp over a generator; x may not be primitive for every irreducible poly,
        # so search for one.
        for g in range(2, q):
            exp = [0] * (2 * order)
            x = 1
            seen = set()
            for i in range(order):
                exp[i] = x
                seen.add(x)
                x = _clmul_reduce(x, g, params.poly, params.t)
            if len(seen) == order:
                break
        else:  # t >= 3 always has a generator
            raise FieldError("no generator found")
        for i in range(order, 2 * order):
            exp[i] = exp[i - order]
        log = [0] * q
        for i in range(order):
            log[exp[i]] = i
        gf_ = cls(params, tuple(exp), tuple(log), ())
        cubes = tuple(gf_.mul(gf_.mul(a, a), a) for a in range(q))
        object.__setattr__(gf_, "cubes", cubes)
        return gf_

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def q(self) -> int:
        return self.params.q

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise FieldError(f"{a} is not an element of GF(2^{self.t})")
        return a

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def cube(self, a: int) -> int:
        return self.cubes[a]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.exp[(self.q - 1 - self.log[a]) % (self.q - 1)]

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            return 0 if k > 0 else 1
        return self.exp[(self.log[a] * k) % (self.q - 1)]

    def elements(self) -> range:
        return range(self.q)


def _clmul_reduce(a: int, b: int, poly: int, t: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> t:
            a ^= poly
    return r


@lru_cache(maxsize=None)
def gf(t: int, poly: int = 0) -> GF:
    return GF.build(FieldParams(t, poly))


def clmul_reduce(a: int, b: int, params: FieldParams) -> int:
    """Shift-and-add product; table-free reference for tests."""
    return _clmul_reduce(a, b, params.poly, params.t)


def irreducible_polys(t: int) -> list[int]:
    return [p for p in range(1 << t, 1 << (t + 1)) if is_irreducible(p)]
