import pytest

from prepgraph.field import FieldError, FieldParams, clmul_reduce, gf, irreducible_polys


@pytest.mark.parametrize("t", [3, 5])
def test_tables_match_shift_and_add(t):
    F = gf(t)
    for a in range(F.q):
        for b in range(F.q):
            assert F.mul(a, b) == clmul_reduce(a, b, F.params)


@pytest.mark.parametrize("t", [3, 5, 7])
def test_inverse_and_cube(t):
    F = gf(t)
    for a in range(1, F.q):
        assert F.mul(a, F.inv(a)) == 1
        assert F.cube(a) == F.mul(F.mul(a, a), a)
    with pytest.raises(ZeroDivisionError):
        F.inv(0)


def test_every_irreducible_poly_builds():
    polys = irreducible_polys(5)
    assert len(polys) == 6
    for p in polys:
        F = gf(5, p)
        assert sorted(F.exp[:31]) == list(range(1, 32))


@pytest.mark.parametrize("t, poly", [(4, 0), (3, 0b1001), (3, 0b111), (9, 0)])
def test_bad_params(t, poly):
    with pytest.raises(FieldError):
        FieldParams(t, poly)
