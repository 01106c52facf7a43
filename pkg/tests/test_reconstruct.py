import json

import numpy as np
import pytest

from prepgraph._align import align_words
from prepgraph.code import CodeParams
from prepgraph.errors import BudgetExceeded, StructuralError
from prepgraph.graph import NeighborhoodOracle, find_anchor, flip_edge, unseal
from prepgraph.reconstruct import (
    EquivalenceCertificate,
    Labeling,
    NoPerfectMatching,
    check_certificate,
    check_equivalence,
    codes_equivalent,
    extend_shell,
    master_invariant,
    propagate_n0,
    reconstruct_n0,
    seed,
    verify,
)


def test_n0_certificate(g5, labeling5):
    lab = labeling5
    assert lab.n_labelled == 41665
    cert = verify(g5, lab)
    assert cert.checks["vertices_certified"] == 41665
    assert check_certificate(cert, lab, g5)
    assert master_invariant(g5, lab) == g5.n_edges


def test_certificate_json_and_tampering(g5, labeling5):
    cert = verify(g5, labeling5)
    again = EquivalenceCertificate.from_json(cert.to_json())
    assert again == cert
    bad = EquivalenceCertificate.from_json(cert.to_json())
    bad.permutation[0], bad.permutation[1] = bad.permutation[1], bad.permutation[0]
    assert not check_certificate(bad, labeling5, g5)
    bad = EquivalenceCertificate.from_json(cert.to_json())
    bad.translation_support = [1]
    assert not check_certificate(bad, labeling5, g5)
    obj = json.loads(cert.to_json())
    obj["permutation"][0] = obj["permutation"][1]
    with pytest.raises(ValueError):
        EquivalenceCertificate.from_json(json.dumps(obj))


def test_wrong_labels_are_rejected(g5, labeling5):
    lab = labeling5.copy()
    a = find_anchor(g5)
    u, v = [x for x in (1, 2, 3) if x != a][:2]
    lab.vertex_masks[[u, v]] = lab.vertex_masks[[v, u]]
    with pytest.raises(NoPerfectMatching):
        verify(g5, lab)
    with pytest.raises(StructuralError):
        master_invariant(g5, lab)


def test_labeling_save_load(tmp_path, labeling5):
    path = tmp_path / "lab.npz"
    labeling5.save(path)
    back = Labeling.load(path)
    assert np.array_equal(back.vertex_masks, labeling5.vertex_masks)
    assert back.anchor == labeling5.anchor and back.seed_clique == labeling5.seed_clique


def test_seed_freedom(g5, analysis5, labeling5):
    """A second, randomized seeding differs from the canonical one by an
    automorphism; aligning the two label spaces recovers it."""
    tc, ps = analysis5
    l1 = labeling5
    l2 = propagate_n0(g5, seed(g5, tc, ps, np.random.default_rng(7)), tc, ps)
    c1, c2 = verify(g5, l1), verify(g5, l2)
    pi1 = np.array(c1.permutation) - 1
    pi2 = np.array(c2.permutation) - 1
    # vertex-wise: label1 -> true -> label2
    inv2 = np.argsort(pi2)
    direct = inv2[pi1]
    from prepgraph.reconstruct import permute_masks

    assert np.array_equal(permute_masks(l1.vertex_masks, direct), l2.vertex_masks)
    # set-level alignment (no vertex correspondence) gives an automorphism
    W1 = l1.vertex_masks[l1.vertex_masks != 0]
    W2 = l2.vertex_masks[l2.vertex_masks != 0]
    rho = align_words(W1, W2, 64)
    assert rho is not None
    sigma = np.empty(64, dtype=np.int64)
    sigma[pi1] = pi2[rho]
    auto = EquivalenceCertificate(64, [int(x) + 1 for x in sigma], [], "automorphism")
    assert check_equivalence(auto, g5, g5)


def test_extend_shell(g5, labeling5):
    oracle = NeighborhoodOracle(g5, seed=3)
    a = find_anchor(g5)
    u = 1 if a != 1 else 2
    with pytest.raises(BudgetExceeded):
        extend_shell(oracle, labeling5, u, budget=100)
    lab = extend_shell(oracle, labeling5, u)
    new = lab.n_labelled - labeling5.n_labelled
    assert new == 41283
    w = np.bitwise_count(lab.vertex_masks[~np.r_[labeling5.labelled, np.zeros(new, bool)]])
    assert dict(zip(*np.unique(w, return_counts=True))) == {8: 3495, 10: 15300, 12: 22488}
    cert = verify(oracle, lab)
    assert check_certificate(cert, lab, oracle)
    with pytest.raises(ValueError):
        extend_shell(oracle, lab, a)


@pytest.mark.parametrize("mode", ["drop", "add"])
def test_fault_injection(g5, mode):
    rng = np.random.default_rng(0 if mode == "drop" else 1)
    a = find_anchor(g5)
    if mode == "drop":
        e = g5.edges()
        e = e[(e[:, 0] != a) & (e[:, 1] != a)]
        u, v = map(int, e[rng.integers(len(e))])
    else:
        while True:
            u, v = map(int, rng.integers(g5.n_vertices, size=2))
            if u != v and a not in (u, v) and not g5.has_edge(u, v):
                break
    bad = flip_edge(g5, u, v)
    with pytest.raises(StructuralError):
        reconstruct_n0(bad)


def test_codes_equivalent_parameter_mismatch(g3, g5):
    with pytest.raises(ValueError):
        codes_equivalent(g3, g5)


def test_codes_equivalent_t3_has_no_certificate(g3):
    # t=3 triple cliques are not separable; reconstruction refuses the input
    with pytest.raises(ValueError):
        codes_equivalent(g3, g3)
