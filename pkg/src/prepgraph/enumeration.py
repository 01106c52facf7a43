"""Codeword slices needed by the graph work.

Words are handled in bulk as uint64 masks (bit i = coordinate index i).
Every list returned here is in canonical order: lexicographic by sorted
support, independent of how the work was partitioned.
"""

from __future__ import annotations

import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from pathlib import Path

import numpy as np

from . import kernels
from .code import (
    CodeError,
    CodeParams,
    Coordinate,
    Word,
    fourth_index,
    popcount,
    preparata_contains,
    support_sort_order,
    word_key,
)

log = logging.getLogger(__name__)

CACHE_MAGIC = b"PREPW6\0"
CACHE_VERSION = 1


def _check_t(params: CodeParams) -> None:
    if params.t not in (3, 5):
        raise CodeError(f"enumeration supports t in {{3, 5}}, got {params.t}")


def canonical(masks: np.ndarray) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.uint64)
    return masks[support_sort_order(masks)]


def as_words(masks: np.ndarray, params: CodeParams) -> list[Word]:
    return [Word(int(b), params.n) for b in masks]


# --- brute-force route ------------------------------------------------------


def scan_distance6(params: CodeParams, base_key: int = 0, threads: int = 1) -> np.ndarray:
    """All weight-6 e with (c XOR e) in P(m), where base_key = key(c).

    The 6-subset space is split by smallest coordinate into chunks that
    run on ``threads`` workers; chunk results are concatenated in chunk
    order, which is already the lexicographic order.
    """
    impl = kernels.backend()
    n = params.n
    keys, valid = params.keys, params.valid_preparata
    bounds = _chunks(n - 5, max(1, threads) * 4 if threads > 1 else 1)
    if threads <= 1:
        parts = [impl.scan_w6(keys, valid, base_key, lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda b: impl.scan_w6(keys, valid, base_key, b[0], b[1]), bounds))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint64)


def _chunks(total: int, k: int) -> list[tuple[int, int]]:
    k = max(1, min(k, total))
    edges = np.linspace(0, total, k + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


# --- algebraic meet-in-the-middle route -------------------------------------


@lru_cache(maxsize=None)
def _subset_table(q: int, size: int, t: int, poly: int):
    """All size-subsets of GF(2^t) with their sum and cube sum."""
    from .field import gf

    field = gf(t, poly)
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64), np.zeros(1, np.int64), np.zeros(1, np.int64)
    subs = np.array(list(combinations(range(q), size)), dtype=np.int64)
    cubes = np.array(field.cubes, dtype=np.int64)
    s1 = np.bitwise_xor.reduce(subs, axis=1)
    s3 = np.bitwise_xor.reduce(cubes[subs], axis=1)
    return subs, s1, s3


def _elems_to_mask(subs: np.ndarray, offset: int) -> np.ndarray:
    out = np.zeros(len(subs), dtype=np.uint64)
    for col in range(subs.shape[1]):
        out |= np.uint64(1) << (subs[:, col] + offset).astype(np.uint64)
    return out


def mitm_distance6(params: CodeParams, c: int = 0) -> np.ndarray:
    """Same set as :func:`scan_distance6` via a table join on the sum balance.

    For each split (|S|, |T|) of the difference e between the halves, the
    X-side subset S fixes the sum and cube sum the Y-side subset T must
    have; Y-subsets are bucketed by (sum, cube sum) and looked up.
    """
    q, t = params.q, params.t
    field = params.gf
    cubes = np.array(field.cubes, dtype=np.int64)
    xs = [i for i in range(q) if c >> i & 1]
    ys = [i for i in range(q) if c >> (q + i) & 1]
    if len(xs) % 2 or len(ys) % 2:
        raise CodeError("anchor must have even weight on both halves")
    a1 = int(np.bitwise_xor.reduce(np.array(xs, dtype=np.int64))) if xs else 0
    b1 = int(np.bitwise_xor.reduce(np.array(ys, dtype=np.int64))) if ys else 0
    a3 = int(np.bitwise_xor.reduce(cubes[xs])) if xs else 0
    b3 = int(np.bitwise_xor.reduce(cubes[ys])) if ys else 0
    found = []
    for i in (0, 2, 4, 6):
        Xs, xs1, xs3 = _subset_table(q, i, t, params.poly)
        Ys, ys1, ys3 = _subset_table(q, 6 - i, t, params.poly)
        need1 = xs1 ^ a1 ^ b1
        need3 = xs3 ^ a3 ^ b3 ^ cubes[xs1 ^ a1]
        ykey = ys1 * q + ys3
        order = np.argsort(ykey, kind="stable")
        ykey_sorted = ykey[order]
        want = need1 * q + need3
        lo = np.searchsorted(ykey_sorted, want, side="left")
        hi = np.searchsorted(ykey_sorted, want, side="right")
        cnt = hi - lo
        if cnt.sum() == 0:
            continue
        xi = np.repeat(np.arange(len(Xs)), cnt)
        yj = order[np.repeat(lo - np.concatenate(([0], np.cumsum(cnt)[:-1])), cnt) + np.arange(cnt.sum())]
        found.append(_elems_to_mask(Xs[xi], 0) | _elems_to_mask(Ys[yj], q))
    if not found:
        return np.zeros(0, dtype=np.uint64)
    return np.concatenate(found)


# --- public operations ------------------------------------------------------


def weight6_codewords(params: CodeParams, method: str = "brute", threads: int = 1,
                      cache_dir: str | Path | None = None) -> np.ndarray:
    """All weight-6 codewords of P(m) as canonical-order uint64 masks."""
    _check_t(params)
    if cache_dir is not None:
        path = cache_path(cache_dir, params)
        if path.exists():
            try:
                masks = read_cache(path, params)
                log.info("w6 cache hit: %s (%d words)", path, len(masks))
                return masks
            except CacheError as exc:
                log.warning("ignoring bad w6 cache %s: %s", path, exc)
    if method == "brute":
        masks = canonical(scan_distance6(params, 0, threads))
    elif method == "algebraic":
        masks = canonical(mitm_distance6(params, 0))
    else:
        raise ValueError(f"unknown method {method!r}")
    if cache_dir is not None:
        write_cache(cache_path(cache_dir, params), params, masks)
        log.info("w6 cache written: %s", cache_path(cache_dir, params))
    return masks


def neighbors_at_distance6(c: Word, params: CodeParams, method: str = "brute",
                           threads: int = 1) -> np.ndarray:
    """All codewords at Hamming distance exactly 6 from the codeword c."""
    _check_t(params)
    if not preparata_contains(c, params):
        raise CodeError("neighbors_at_distance6 needs a codeword of P(m)")
    if method == "brute":
        diffs = scan_distance6(params, word_key(c.bits, params), threads)
    elif method == "mitm":
        diffs = mitm_distance6(params, c.bits)
    else:
        raise ValueError(f"unknown method {method!r}")
    return canonical(diffs ^ np.uint64(c.bits))


def sqs_blocks(params: CodeParams) -> np.ndarray:
    """Weight-4 supports of the perfect code, (k, 4) sorted 0-based indices."""
    _check_t(params)
    n, q = params.n, params.q
    blocks = set()
    for i, j, k in combinations(range(n), 3):
        blocks.add(tuple(sorted((i, j, k, fourth_index(i, j, k, q)))))
    return np.array(sorted(blocks), dtype=np.int64)


def block_masks(blocks: np.ndarray) -> np.ndarray:
    one = np.uint64(1)
    b = np.asarray(blocks).astype(np.uint64)
    return (one << b[:, 0]) | (one << b[:, 1]) | (one << b[:, 2]) | (one << b[:, 3])


@dataclass(frozen=True)
class QuadIndex:
    """Sorted quad mask -> id of the weight-6 codeword containing it."""

    quads: np.ndarray
    owner: np.ndarray
    words: np.ndarray

    @classmethod
    def build(cls, words: np.ndarray) -> "QuadIndex":
        from .code import supports_matrix

        sup = supports_matrix(words)
        combos = np.array(list(combinations(range(sup.shape[1]), 4)), dtype=np.int64)
        one = np.uint64(1)
        q = np.zeros((len(words), len(combos)), dtype=np.uint64)
        for c in range(4):
            q |= one << sup[:, combos[:, c]].astype(np.uint64)
        flat = q.ravel()
        owner = np.repeat(np.arange(len(words)), len(combos))
        order = np.argsort(flat, kind="stable")
        return cls(flat[order], owner[order], words)

    def covers(self, quad_mask: int) -> np.ndarray:
        key = np.uint64(quad_mask)
        lo = np.searchsorted(self.quads, key, side="left")
        hi = np.searchsorted(self.quads, key, side="right")
        return self.owner[lo:hi]


def cover_codeword(quad, params: CodeParams, index: QuadIndex | None = None) -> Word | None:
    """The unique weight-6 codeword containing a non-block quad; None for blocks."""
    idx = [c.index(params) if isinstance(c, Coordinate) else int(c) for c in quad]
    if len(set(idx)) != 4:
        raise CodeError("cover_codeword needs four distinct coordinates")
    i, j, k, l = idx
    if fourth_index(i, j, k, params.q) == l:
        return None
    if index is None:
        index = quad_index(params)
    mask = sum(1 << x for x in idx)
    owners = index.covers(mask)
    if len(owners) != 1:
        raise CodeError(f"quad {sorted(idx)} covered {len(owners)} times")
    return Word(int(index.words[owners[0]]), params.n)


@lru_cache(maxsize=4)
def quad_index(params: CodeParams) -> QuadIndex:
    return QuadIndex.build(weight6_codewords(params))


# --- cache file ---------------------------------------------------------------


class CacheError(ValueError):
    pass


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def cache_path(cache_dir: str | Path, params: CodeParams) -> Path:
    return Path(cache_dir) / f"w6_t{params.t}_p{params.poly}.bin"


def encode_cache(params: CodeParams, masks: np.ndarray) -> bytes:
    lanes = -(-params.n // 64)
    payload = np.asarray(masks, dtype="<u8").reshape(-1, 1)
    if lanes != 1:
        raise CacheError("only n <= 64 is supported")
    body = payload.tobytes()
    header = CACHE_MAGIC + struct.pack("<BBHI", CACHE_VERSION, params.t, params.poly, len(masks))
    return header + body + struct.pack("<Q", fnv1a64(body))


def decode_cache(data: bytes, params: CodeParams) -> np.ndarray:
    hl = len(CACHE_MAGIC) + 8
    if len(data) < hl + 8 or data[: len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise CacheError("bad magic")
    version, t, poly, count = struct.unpack("<BBHI", data[len(CACHE_MAGIC):hl])
    if version != CACHE_VERSION:
        raise CacheError(f"unsupported version {version}")
    if (t, poly) != (params.t, params.poly):
        raise CacheError(f"cache is for t={t}, poly={poly}")
    body = data[hl:-8]
    if len(body) != 8 * count:
        raise CacheError("payload size does not match count")
    (chk,) = struct.unpack("<Q", data[-8:])
    if chk != fnv1a64(body):
        raise CacheError("checksum mismatch")
    return np.frombuffer(body, dtype="<u8").astype(np.uint64)


def write_cache(path: Path, params: CodeParams, masks: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(encode_cache(params, masks))
    tmp.replace(path)


def read_cache(path: Path, params: CodeParams) -> np.ndarray:
    return decode_cache(Path(path).read_bytes(), params)


def weights(masks: np.ndarray) -> np.ndarray:
    return popcount(masks)
