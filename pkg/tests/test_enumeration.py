import random
import time
from math import comb

import numpy as np
import pytest

from prepgraph import oracle
from prepgraph.code import CodeError, Coordinate, Word, perfect_contains, preparata_mask_array
from prepgraph.enumeration import (
    CacheError,
    block_masks,
    cache_path,
    cover_codeword,
    decode_cache,
    encode_cache,
    mitm_distance6,
    neighbors_at_distance6,
    quad_index,
    read_cache,
    sqs_blocks,
    weight6_codewords,
)


def test_w6_t3_both_routes(p3):
    a = weight6_codewords(p3, "brute")
    b = weight6_codewords(p3, "algebraic")
    assert len(a) == 112
    assert a.tobytes() == b.tobytes()
    P, _ = oracle.naive_codes(p3)
    assert np.array_equal(np.sort(a), P[np.bitwise_count(P) == 6])


def test_w6_t5_both_routes(p5):
    a = weight6_codewords(p5, "brute")
    b = weight6_codewords(p5, "algebraic")
    assert len(a) == 41664
    assert a.tobytes() == b.tobytes()
    assert preparata_mask_array(a, p5).all()
    assert np.all(np.bitwise_count(a) == 6)


def test_clique_size_identity(p5):
    # every triple lies in (n-4)/3 weight-6 words
    n = p5.n
    assert 41664 * comb(6, 3) == comb(n, 3) * (n - 4) // 3


def test_unknown_method(p3):
    with pytest.raises(ValueError):
        weight6_codewords(p3, "guess")


def test_neighbors_brute_vs_mitm(p5):
    rnd = np.random.default_rng(4)
    w6 = weight6_codewords(p5)
    # weight-6 codewords as centres: N(c) is a translate of the weight-6 set
    for c in rnd.choice(w6, 2, replace=False):
        w = Word(int(c), 64)
        a = neighbors_at_distance6(w, p5, "brute")
        b = neighbors_at_distance6(w, p5, "mitm")
        assert a.tobytes() == b.tobytes()
        assert len(a) == 41664
        assert np.all(np.bitwise_count(a ^ c) == 6)


def test_neighbors_full_t3(p3, full3):
    from prepgraph.graph import unseal

    truth = unseal(full3)
    for v in range(0, 256, 37):
        got = neighbors_at_distance6(Word(int(truth[v]), 16), p3)
        want = truth[full3.neighbors(v)]
        assert np.array_equal(np.sort(got), np.sort(want))


def test_neighbors_needs_codeword(p3):
    with pytest.raises(CodeError):
        neighbors_at_distance6(Word.from_support([0, 1], 16), p3)


def test_sqs_blocks(p3, p5):
    b3, b5 = sqs_blocks(p3), sqs_blocks(p5)
    assert len(b3) == 140 and len(b5) == 10416
    assert oracle.naive_design_check(b3, 16, 3, 4, 1)
    assert oracle.naive_design_check(b5, 64, 3, 4, 1)
    assert all(perfect_contains(Word(int(m), 64), p5) for m in block_masks(b5)[:500])


def test_no_block_inside_a_weight6_word(p5):
    w6 = weight6_codewords(p5)
    idx = quad_index(p5)
    hits = np.searchsorted(idx.quads, np.sort(block_masks(sqs_blocks(p5))))
    hits = np.minimum(hits, len(idx.quads) - 1)
    assert not np.any(idx.quads[hits] == np.sort(block_masks(sqs_blocks(p5))))
    assert len(idx.quads) == len(w6) * 15


def test_cover_codeword(p3, p5):
    blk = [Coordinate("A", 1), Coordinate("A", 2), Coordinate("A", 3), Coordinate("A", 0)]
    assert cover_codeword(blk, p3) is None
    # exhaustive t=3 dichotomy
    from itertools import combinations

    for quad in combinations(range(16), 4):
        w = cover_codeword(quad, p3)
        if w is not None:
            assert set(quad) <= set(w.support()) and w.weight == 6
    rnd = random.Random(9)
    t0 = time.perf_counter()
    for _ in range(10000):
        quad = rnd.sample(range(64), 4)
        w = cover_codeword(quad, p5)
        assert w is None or set(quad) <= set(w.support())
    assert time.perf_counter() - t0 < 30
    with pytest.raises(CodeError):
        cover_codeword([1, 1, 2, 3], p5)


def test_mitm_is_independent_of_scan(p3):
    a = np.sort(mitm_distance6(p3, 0))
    P, _ = oracle.naive_codes(p3)
    assert np.array_equal(a, P[np.bitwise_count(P) == 6])


def test_cache_roundtrip_and_corruption(tmp_path, p3, p5):
    w = weight6_codewords(p3, cache_dir=tmp_path)
    path = cache_path(tmp_path, p3)
    assert path.exists()
    assert np.array_equal(read_cache(path, p3), w)
    assert np.array_equal(weight6_codewords(p3, cache_dir=tmp_path), w)
    data = bytearray(encode_cache(p3, w))
    data[-20] ^= 1
    with pytest.raises(CacheError):
        decode_cache(bytes(data), p3)
    with pytest.raises(CacheError):
        decode_cache(encode_cache(p3, w), p5)
    with pytest.raises(CacheError):
        decode_cache(b"garbage", p3)
    # a corrupted file is ignored and rewritten
    path.write_bytes(bytes(data))
    assert np.array_equal(weight6_codewords(p3, cache_dir=tmp_path), w)
    assert np.array_equal(read_cache(path, p3), w)
