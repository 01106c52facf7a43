"""Extended Preparata code P(m) and the extended perfect code containing it.

Coordinates are pairs (half, element) with half in {A, B} and element in
GF(2^t); index = element for A and 2^t + element for B.  A word of length
n = 2^(t+1) is stored as an int bitmask (bit i = coordinate index i), which
fits a uint64 lane for every supported t.

Membership uses the classical subset-pair construction.  With (X, Y) the
supports on the two halves, a word is in P(m) iff

    |X|, |Y| even;  sum(X) = sum(Y);  sum(x^3 for X) + sum(X)^3 = sum(y^3 for Y)

and in the extended perfect code iff the first two conditions hold.  Any
irreducible reduction polynomial gives an equivalent code (a field
isomorphism permutes coordinates within each half).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .field import GF, FieldParams, gf


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class CodeParams:
    field: FieldParams

    @classmethod
    def from_t(cls, t: int, poly: int = 0) -> "CodeParams":
        return cls(FieldParams(t, poly))

    @property
    def t(self) -> int:
        return self.field.t

    @property
    def poly(self) -> int:
        return self.field.poly

    @property
    def q(self) -> int:
        return 1 << self.field.t

    @property
    def n(self) -> int:
        return 2 << self.field.t

    @property
    def m(self) -> int:
        return self.field.t + 1

    @property
    def gf(self) -> GF:
        return gf(self.field.t, self.field.poly)

    @cached_property
    def keys(self) -> np.ndarray:
        return coordinate_keys(self)

    @cached_property
    def valid_preparata(self) -> np.ndarray:
        return _key_table(self, cube_check=True)

    @cached_property
    def valid_perfect(self) -> np.ndarray:
        return _key_table(self, cube_check=False)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1


class Coordinate(NamedTuple):
    half: str  # "A" or "B"
    elem: int

    def index(self, params: CodeParams) -> int:
        if self.half not in ("A", "B") or not 0 <= self.elem < params.q:
            raise CodeError(f"bad coordinate {self}")
        return self.elem if self.half == "A" else params.q + self.elem

    def label(self, params: CodeParams) -> int:
        return self.index(params) + 1

    @classmethod
    def from_index(cls, i: int, params: CodeParams) -> "Coordinate":
        if not 0 <= i < params.n:
            raise CodeError(f"coordinate index {i} out of range for n={params.n}")
        return cls("A", i) if i < params.q else cls("B", i - params.q)

    def __str__(self) -> str:
        return f"{self.half}:{self.elem}"


@dataclass(frozen=True)
class SupportPair:
    X: frozenset
    Y: frozenset


@dataclass(frozen=True, order=True)
class Word:
    bits: int
    n: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.n:
            raise CodeError(f"word does not fit length {self.n}")

    @classmethod
    def zero(cls, n: int) -> "Word":
        return cls(0, n)

    @classmethod
    def from_support(cls, support: Iterable[int], n: int) -> "Word":
        bits = 0
        for i in support:
            if not 0 <= i < n:
                raise CodeError(f"index {i} out of range")
            bits |= 1 << i
        return cls(bits, n)

    @classmethod
    def from_labels(cls, labels: Iterable[int], n: int) -> "Word":
        return cls.from_support((i - 1 for i in labels), n)

    @classmethod
    def from_pair(cls, pair: SupportPair, params: CodeParams) -> "Word":
        idx = [x for x in pair.X] + [params.q + y for y in pair.Y]
        return cls.from_support(idx, params.n)

    @classmethod
    def from_hex(cls, text: str, n: int) -> "Word":
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        if len(text) != -(-n // 4):
            raise CodeError(f"expected {-(-n // 4)} hex digits for n={n}, got {len(text)}")
        return cls(int(text, 16), n)

    def hex(self) -> str:
        return format(self.bits, f"0{-(-self.n // 4)}x")

    def support(self) -> tuple[int, ...]:
        return mask_support(self.bits)

    def labels(self) -> list[int]:
        return [i + 1 for i in self.support()]

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def pair(self, params: CodeParams) -> SupportPair:
        _check_len(self, params)
        q = params.q
        s = self.support()
        return SupportPair(frozenset(i for i in s if i < q), frozenset(i - q for i in s if i >= q))

    def __xor__(self, other: "Word") -> "Word":
        return translate(self, other)

    def __str__(self) -> str:
        return self.hex()


def mask_support(bits: int) -> tuple[int, ...]:
    out = []
    i = 0
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return tuple(out)


def _check_len(w: Word, params: CodeParams) -> None:
    if w.n != params.n:
        raise CodeError(f"word length {w.n} does not match n={params.n}")


def _half_sums(w: Word, params: CodeParams):
    field = params.gf
    pair = w.pair(params)
    s1x = reduce(field.add, pair.X, 0)
    s1y = reduce(field.add, pair.Y, 0)
    s3x = reduce(field.add, (field.cube(x) for x in pair.X), 0)
    s3y = reduce(field.add, (field.cube(y) for y in pair.Y), 0)
    return len(pair.X), len(pair.Y), s1x, s1y, s3x, s3y


def perfect_contains(w: Word, params: CodeParams) -> bool:
    _check_len(w, params)
    nx, ny, s1x, s1y, _, _ = _half_sums(w, params)
    return nx % 2 == 0 and ny % 2 == 0 and s1x == s1y


def preparata_contains(w: Word, params: CodeParams) -> bool:
    _check_len(w, params)
    nx, ny, s1x, s1y, s3x, s3y = _half_sums(w, params)
    if nx % 2 or ny % 2 or s1x != s1y:
        return False
    return s3x ^ params.gf.cube(s1x) == s3y


def translate(w: Word, by: Word) -> Word:
    if w.n != by.n:
        raise CodeError("length mismatch")
    return Word(w.bits ^ by.bits, w.n)


def check_permutation(pi: Sequence[int], n: int) -> None:
    if len(pi) != n or sorted(pi) != list(range(n)):
        raise CodeError("not a permutation of range(n)")


def permute(w: Word, pi: Sequence[int]) -> Word:
    """Move coordinate i to position pi[i] (0-based)."""
    check_permutation(pi, w.n)
    return Word(sum(1 << pi[i] for i in w.support()), w.n)


def permute_mask(bits: int, pi: Sequence[int]) -> int:
    out = 0
    for i in mask_support(bits):
        out |= 1 << pi[i]
    return out


def distance(w1: Word, w2: Word) -> int:
    if w1.n != w2.n:
        raise CodeError("length mismatch")
    return (w1.bits ^ w2.bits).bit_count()


def fourth_point(triple: Sequence[Coordinate], params: CodeParams) -> Coordinate:
    """The coordinate completing a triple to a weight-4 word of the perfect code."""
    if len(triple) != 3 or len(set(triple)) != 3:
        raise CodeError("fourth_point needs three distinct coordinates")
    for c in triple:
        c.index(params)
    halves = [c.half for c in triple]
    elem = triple[0].elem ^ triple[1].elem ^ triple[2].elem
    if halves.count("A") in (0, 3):
        half = halves[0]
    else:
        # the lone coordinate's half receives the fourth point
        half = "A" if halves.count("A") == 1 else "B"
    return Coordinate(half, elem)


def fourth_index(i: int, j: int, k: int, q: int) -> int:
    """Index form of :func:`fourth_point` for hot loops."""
    a, b, c = i >= q, j >= q, k >= q
    elem = (i % q) ^ (j % q) ^ (k % q)
    nb = a + b + c
    if nb == 0:
        return elem
    if nb == 3:
        return q + elem
    return q + elem if nb == 1 else elem


# --- bulk (key) representation -------------------------------------------
#
# Each coordinate gets an int key packing its contribution to
# (sum over both halves, cube sum over both halves, X-side sum, |X| parity,
# |Y| parity).  The key of a word is the XOR of its coordinates' keys, and
# translation by c XORs in the key of c.


def _key_layout(t: int):
    return 0, t, 2 * t, 3 * t, 3 * t + 1  # d1, d3, s1x, px, py shifts


def coordinate_keys(params: CodeParams) -> np.ndarray:
    t, q = params.t, params.q
    d1, d3, s1x, px, py = _key_layout(t)
    keys = np.zeros(params.n, dtype=np.int64)
    for e in range(q):
        c = params.gf.cube(e)
        keys[e] = (e << d1) | (c << d3) | (e << s1x) | (1 << px)
        keys[q + e] = (e << d1) | (c << d3) | (1 << py)
    return keys


def _key_table(params: CodeParams, cube_check: bool) -> np.ndarray:
    t = params.t
    d1, d3, s1x, px, py = _key_layout(t)
    size = 1 << (3 * t + 2)
    valid = np.zeros(size, dtype=np.uint8)
    cubes = params.gf.cubes
    q = params.q
    for sx in range(q):
        if cube_check:
            valid[(cubes[sx] << d3) | (sx << s1x)] = 1
        else:
            for s3 in range(q):
                valid[(s3 << d3) | (sx << s1x)] = 1
    return valid


def word_key(bits: int, params: CodeParams) -> int:
    keys = params.keys
    k = 0
    for i in mask_support(bits):
        k ^= int(keys[i])
    return k


def mask_keys(masks: np.ndarray, params: CodeParams) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.uint64)
    out = np.zeros(masks.shape, dtype=np.int64)
    for i, key in enumerate(params.keys):
        bit = ((masks >> np.uint64(i)) & np.uint64(1)).astype(bool)
        out[bit] ^= key
    return out


def preparata_mask_array(masks: np.ndarray, params: CodeParams) -> np.ndarray:
    return params.valid_preparata[mask_keys(masks, params)].astype(bool)


def perfect_mask_array(masks: np.ndarray, params: CodeParams) -> np.ndarray:
    return params.valid_perfect[mask_keys(masks, params)].astype(bool)


def full_code(params: CodeParams) -> list[Word]:
    """All codewords of P(4) by filtering the 2^16 words (t = 3 only)."""
    if params.t != 3:
        raise CodeError("full_code is limited to t = 3 (2^16 words)")
    masks = np.arange(1 << params.n, dtype=np.uint64)
    keep = masks[preparata_mask_array(masks, params)]
    return [Word(int(b), params.n) for b in keep]


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=np.uint64))


def support_sort_order(masks: np.ndarray) -> np.ndarray:
    """Argsort of masks by lexicographic order of their sorted supports."""
    masks = np.asarray(masks, dtype=np.uint64)
    if len(masks) == 0:
        return np.zeros(0, dtype=np.int64)
    idx = supports_matrix(masks)
    # lexsort keys: last key is primary; pad ragged rows with -1 so shorter
    # prefixes sort first
    return np.lexsort(idx.T[::-1])


def supports_matrix(masks: np.ndarray) -> np.ndarray:
    """(k, max_weight) int array of sorted supports, padded with -1."""
    masks = np.asarray(masks, dtype=np.uint64)
    w = popcount(masks).astype(np.int64)
    width = int(w.max()) if len(masks) else 0
    bits = ((masks[:, None] >> np.arange(64, dtype=np.uint64)) & np.uint64(1)).astype(bool)
    rows, cols = np.nonzero(bits)
    out = np.full((len(masks), width), -1, dtype=np.int64)
    starts = np.concatenate(([0], np.cumsum(w)[:-1]))
    pos = np.arange(len(rows)) - np.repeat(starts, w)
    out[rows, pos] = cols
    return out


def masks_from_supports(supports: np.ndarray) -> np.ndarray:
    s = np.asarray(supports, dtype=np.int64)
    out = np.zeros(len(s), dtype=np.uint64)
    for col in range(s.shape[1]):
        c = s[:, col]
        ok = c >= 0
        out[ok] |= np.uint64(1) << c[ok].astype(np.uint64)
    return out
