from fractions import Fraction
from math import comb

import numpy as np
import pytest

from steinberg.rootdata import (
    DatumError,
    build_root_datum,
    datum_from_json,
    make_datum_automorphism,
)

ROOT_COUNTS = [("A1", 1), ("A2", 3), ("A3", 6), ("A4", 10), ("B2", 4), ("B3", 9), ("C3", 9),
               ("B4", 16), ("D4", 12), ("D5", 20), ("G2", 6), ("F4", 24), ("E6", 36)]


@pytest.mark.parametrize("label,count", ROOT_COUNTS)
def test_positive_root_counts(label, count):
    d = build_root_datum(label)
    assert len(d.roots.positive) == count
    # the highest root is unique and heights are consistent with coordinates
    for r in d.roots.positive:
        assert d.roots.heights[r] == sum(r)
        assert all(c >= 0 for c in r)


def test_closed_form_counts():
    for n in range(1, 6):
        assert len(build_root_datum(f"A{n}").roots.positive) == comb(n + 1, 2)
    for n in range(2, 6):
        assert len(build_root_datum(f"B{n}").roots.positive) == n * n
    for n in range(4, 6):
        assert len(build_root_datum(f"D{n}").roots.positive) == n * (n - 1)


def test_a2_sc_datum():
    d = build_root_datum("A2", "sc")
    assert d.cartan.tolist() == [[2, -1], [-1, 2]]
    # X has the fundamental weights as basis: i' expressed in that basis is column i of the Cartan matrix
    assert d.simple_roots.tolist() == [[2, -1], [-1, 2]]
    for i in range(2):
        for j in range(2):
            assert d.pair(i, d.simple_roots[j]) == d.cartan[i, j]


@pytest.mark.parametrize("lattice", ["sc", "ad"])
def test_pairing_reproduces_cartan(lattice):
    for label in ["A3", "B3", "C3", "G2", "F4", "D4"]:
        d = build_root_datum(label, lattice)
        for i in range(d.rank):
            for j in range(d.rank):
                assert d.pair(i, d.simple_roots[j]) == d.cartan[i, j]


def test_b2_off_diagonal_product():
    c = build_root_datum("B2").cartan
    assert c[0, 1] * c[1, 0] == 2
    assert build_root_datum("G2").cartan[0, 1] * build_root_datum("G2").cartan[1, 0] == 3


def test_invalid_cartan_rejected():
    with pytest.raises(DatumError):
        build_root_datum([[2, 1], [1, 2]])
    with pytest.raises(DatumError):
        build_root_datum([[2, -2], [-2, 2]])   # affine, not positive definite
    with pytest.raises(DatumError):
        build_root_datum("A2", "weird")
    with pytest.raises(DatumError):
        build_root_datum("E8")


def test_cartan_input_is_classified():
    assert build_root_datum([[2, -1], [-2, 2]]).roots is not None
    assert len(build_root_datum([[2, -1, 0], [-1, 2, -1], [0, -1, 2]]).roots.positive) == 6


def test_automorphism_orders():
    assert make_datum_automorphism(build_root_datum("A2"), [1, 0]).order == 2
    assert make_datum_automorphism(build_root_datum("A3"), [2, 1, 0]).order == 2
    assert make_datum_automorphism(build_root_datum("D4"), [2, 1, 3, 0]).order == 3
    assert make_datum_automorphism(build_root_datum("E6"), [5, 1, 4, 3, 2, 0]).order == 2
    assert make_datum_automorphism(build_root_datum("A2")).is_identity


def test_non_automorphisms_rejected():
    with pytest.raises(DatumError):
        make_datum_automorphism(build_root_datum("B2"), [1, 0])
    with pytest.raises(DatumError):
        make_datum_automorphism(build_root_datum("A3"), [1, 0, 2])
    with pytest.raises(DatumError):
        make_datum_automorphism(build_root_datum("A2"), [0, 0])


def test_datum_from_json_uses_one_based_delta():
    d, delta = datum_from_json('{"type": "A2", "lattice": "ad", "delta": [2, 1]}')
    assert d.lattice == "ad" and delta.perm == (1, 0)
    d, delta = datum_from_json({"cartan": [[2, -1], [-1, 2]]})
    assert delta.is_identity


@pytest.mark.parametrize("label", ["A3", "B3", "C3", "G2", "F4", "D4"])
def test_structure_constants(label):
    rs = build_root_datum(label, "ad").roots
    for a in rs.all_roots:
        for b in rs.all_roots:
            s = tuple(x + y for x, y in zip(a, b))
            n = rs.N(a, b)
            if rs.is_root(s):
                # N_{a,b} = ±(p + 1)
                assert abs(n) == rs.string_p(a, b) + 1
                assert rs.N(b, a) == -n
                assert rs.N(tuple(-x for x in a), tuple(-x for x in b)) in (n, -n)
            else:
                assert n == 0


@pytest.mark.parametrize("label,perm", [("A2", [1, 0]), ("A3", [2, 1, 0]), ("D4", [2, 1, 3, 0]),
                                        ("E6", [5, 1, 4, 3, 2, 0])])
def test_delta_preserves_constant_magnitudes(label, perm):
    d = build_root_datum(label, "ad")
    delta = make_datum_automorphism(d, perm)
    rs = d.roots
    for a in rs.positive:
        assert rs.is_root(delta.apply_root(a))
        for b in rs.positive:
            assert abs(rs.N(delta.apply_root(a), delta.apply_root(b))) == abs(rs.N(a, b))


def test_form_is_positive_definite():
    for label, _ in ROOT_COUNTS:
        f = build_root_datum(label).form
        assert np.allclose(f, f.T)
        assert np.linalg.det(f.astype(float)) > 0
        assert Fraction(int(round(np.linalg.det(f.astype(float))))) > 0
