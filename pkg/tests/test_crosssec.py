from itertools import combinations
from math import gcd

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from steinberg.chevalley import MembershipError
from steinberg.crosssec import (
    CrossSectionError,
    alpha,
    alpha_domain,
    build_inverse,
    make_problem,
    orbit_count,
    sigma_unipotent_count,
    spaltenstein_demo,
    symbolic_xi_maps,
    t_w_invariants,
    verify_theorem,
    xi,
    xi_inverse,
)
from steinberg.polyfam import PolyMap, jacobian_det, verify_two_sided_inverse
from steinberg.rings import frobenius, make_ring
from steinberg.rootdata import build_root_datum, make_datum_automorphism
from steinberg.weyl import delta_classes, twisted_matrix, weyl_group


def problem(label, ring, word, lattice="sc", perm=None, frob=None):
    d = build_root_datum(label, lattice)
    r = make_ring(ring)
    delta = make_datum_automorphism(d, perm)
    chi = frobenius(r, frob) if frob else None
    return make_problem(d, r, weyl_group(d).from_word(word), delta, chi)


def test_a1_xi_example():
    p = problem("A1", "Z", (0,))
    G = p.group
    for a, b in [(1, 2), (-3, 5), (0, 0), (7, -7)]:
        g = xi(p, G.x(0, a), G.letter(0, b))
        assert G.cell_coords(p.w, g) == ((a + b,), (-a,))
        u, z = xi_inverse(build_inverse(p), G.uw_element(p.w, (a,)) * G.u_element((b,)))
        # (c, d) -> (-d, c + d)
        assert G.u_coords(u) == (-b,) and G.cell(p.w.word).coords_of(z) == (a + b,)


def test_xi_of_identity_is_the_lift():
    p = problem("A2", "Fq:3", (0, 1))
    G = p.group
    assert xi(p, G.identity, p.w_lift) == p.w_lift
    assert xi_inverse(build_inverse(p), p.w_lift) == (G.identity, p.w_lift)


def test_xi_rejects_bad_inputs():
    p = problem("A2", "Fq:2", (0, 1))
    G = p.group
    with pytest.raises(MembershipError):
        xi(p, G.s(0), p.w_lift)
    with pytest.raises(MembershipError):
        xi(p, G.identity, G.s(0))
    with pytest.raises(MembershipError):
        xi_inverse(build_inverse(p), G.identity)


def test_non_elliptic_or_non_minimal_rejected():
    d = build_root_datum("A2")
    W = weyl_group(d)
    r = make_ring("Fq:2")
    with pytest.raises(CrossSectionError):
        make_problem(d, r, W.s(0))
    with pytest.raises(CrossSectionError):
        make_problem(d, r, W.identity)
    with pytest.raises(CrossSectionError):
        make_problem(build_root_datum("A3"), r, weyl_group(build_root_datum("A3")).from_word((0, 1, 0, 2, 1)))
    with pytest.raises(CrossSectionError):
        t_w_invariants(W.s(0))


def test_build_inverse_transport():
    p = problem("A2", "Fq:2", (1, 0))
    inv = build_inverse(p)
    assert inv.good_w.word == (0, 1)
    assert len(inv.transport_path) == 1
    js = inv.to_json()
    assert js["good_w"] == [1, 2] and js["e"] == 3
    assert js["y_star"] == [[1, 2, 1], [1, 2, 1]]
    assert build_inverse(problem("A2", "Fq:2", (0, 1))).transport_path == []


@pytest.mark.parametrize("label,ring,lattice,perm,frob", [
    ("A2", "Fq:5", "sc", None, None), ("A2", "Fq:4", "sc", [1, 0], 2), ("A2", "Fq:3", "ad", [1, 0], None),
    ("B2", "Fq:5", "ad", None, None), ("A3", "Fq:3", "sc", [2, 1, 0], None), ("G2", "Fq:3", "ad", None, None),
    ("A3", "Zmod:4", "sc", None, None)])
def test_inverse_round_trip_sampled(label, ring, lattice, perm, frob):
    d = build_root_datum(label, lattice)
    delta = make_datum_automorphism(d, perm)
    r = make_ring(ring)
    rng = np.random.default_rng(7)
    for c in delta_classes(d, delta):
        if not c.elliptic:
            continue
        for w in c.min_length_elements:
            p = make_problem(d, r, w, delta, frobenius(r, frob) if frob else None)
            G = p.group
            inv = build_inverse(p)
            els = r.elements()
            for _ in range(6):
                uc = [els[i] for i in rng.integers(0, r.size, G.n)]
                zc = [els[i] for i in rng.integers(0, r.size, w.length)]
                u, z = G.u_element(uc), G.uw_element(w, zc)
                assert inv(xi(p, u, z)) == (u, z)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=6, max_size=6),
       st.lists(st.integers(0, 4), min_size=3, max_size=3), st.integers(0, 3))
def test_equivariance(uc, u2c, zi):
    p = problem("A2", "Fq:5", (0, 1))
    G = p.group
    u, u2 = G.u_element(uc[:3]), G.u_element(u2c)
    z = G.uw_element(p.w, uc[3:5])
    g = xi(p, u, z)
    assert u2 * g * p.pi(u2).inverse() == xi(p, u2 * u, z)
    a, b = xi_inverse(build_inverse(p), g)
    assert (a, b) == (u, z)


def _smith_oracle(m):
    """Invariant factors from gcds of k x k minors."""
    M = sympy.Matrix(m)
    n = M.rows
    divisors = [1]
    for k in range(1, n + 1):
        g = 0
        for rows in combinations(range(n), k):
            for cols in combinations(range(n), k):
                g = gcd(g, int(M.extract(list(rows), list(cols)).det()))
        divisors.append(g)
    return tuple(f for f in (divisors[k] // divisors[k - 1] for k in range(1, n + 1)) if f != 1)


@pytest.mark.parametrize("label,lattice,perm", [
    ("A1", "sc", None), ("A2", "sc", None), ("A2", "ad", None), ("A3", "sc", None), ("B2", "sc", None),
    ("B3", "ad", None), ("C3", "sc", None), ("G2", "sc", None), ("A2", "sc", [1, 0]), ("A3", "ad", [2, 1, 0]),
    ("D4", "sc", None)])
def test_t_w_matches_minor_gcds(label, lattice, perm):
    d = build_root_datum(label, lattice)
    delta = make_datum_automorphism(d, perm)
    for c in delta_classes(d, delta):
        if not c.elliptic:
            continue
        orders = set()
        for w in c.min_length_elements:
            t = t_w_invariants(w, delta)
            m = twisted_matrix(w, delta) - np.eye(d.rank_X, dtype=np.int64)
            assert tuple(sorted(t.factors)) == tuple(sorted(_smith_oracle(m.tolist())))
            assert t.order == abs(t.det)
            orders.add(t.order)
        assert len(orders) == 1


def test_t_w_examples():
    assert t_w_invariants(problem("A1", "Fq:2", (0,))).order == 2
    assert t_w_invariants(problem("A2", "Fq:2", (0, 1))).factors == (3,)
    assert t_w_invariants(problem("A2", "Fq:2", (0, 1), lattice="ad")).order == 3
    assert t_w_invariants(problem("G2", "Fq:2", (0, 1), lattice="ad")).order == 1


@pytest.mark.parametrize("label,word,q", [("A1", (0,), "Fq:2"), ("A1", (0,), "Fq:4"), ("A2", (0, 1), "Fq:3"),
                                          ("A3", (0, 1, 2), "Fq:2")])
def test_sigma_has_one_unipotent(label, word, q):
    n, found = sigma_unipotent_count(problem(label, q, word))
    assert n == len(found) == 1


def test_sigma_requires_defining_field():
    with pytest.raises(CrossSectionError):
        sigma_unipotent_count(problem("B2", "Fq:2", (0, 1), lattice="ad"))
    with pytest.raises(CrossSectionError):
        sigma_unipotent_count(problem("A1", "Zmod:4", (0,)))


@pytest.mark.parametrize("ring,orbits,size", [("Fq:2", 4, 8), ("Fq:3", 9, 27)])
def test_orbit_count_a2(ring, orbits, size):
    out = orbit_count(problem("A2", ring, (0, 1)))
    assert out["orbits"] == out["expected_orbits"] == orbits
    assert out["orbit_sizes"] == [size] and out["free"]


def test_alpha_is_bijective_onto_u():
    for ring in ["Fq:2", "Fq:3"]:
        p = problem("A2", ring, (0, 1))
        left, right = alpha_domain(p)
        q = p.ring.size
        assert len(left) * len(right) == q ** 3
        images = {alpha(p, a, b).key for a in left for b in right}
        assert len(images) == q ** 3
        assert all(p.group.in_U(alpha(p, a, b)) for a in left[:2] for b in right[:2])


def test_alpha_rejects_bad_factors():
    p = problem("A2", "Fq:2", (0, 1))
    G = p.group
    left, right = alpha_domain(p)
    bad = next(u for _, u in G.u_items if all(u != v for v in left))
    with pytest.raises(MembershipError):
        alpha(p, bad, right[0])


def test_verify_theorem_small():
    rep = verify_theorem(problem("B2", "Fq:2", (0, 1), lattice="ad"))
    assert rep["injective"] and rep["surjective"] and rep["inverse_ok"]
    assert rep["points"] == rep["cell_size"] == 2 ** 6
    assert "timings" not in rep
    assert "timings" in verify_theorem(problem("A1", "Fq:2", (0,)), timings=True)


def test_spaltenstein():
    rep = spaltenstein_demo(make_ring("PolyZ:x"))
    assert rep["identity_holds"] and rep["u_x_in_U"]
    rep = spaltenstein_demo(make_ring("Fq:2"))
    assert rep["identity_holds"]
    assert rep["isotropy_size"] == rep["isotropy_size_exhaustive"] == 2
    assert not rep["action_free"] and rep["orbit_size"] == 2 ** 14
    rep = spaltenstein_demo(make_ring("Fq:3"))
    assert rep["identity_holds"] and rep["isotropy_size"] == 3


def test_symbolic_a1():
    d = build_root_datum("A1")
    f, g = symbolic_xi_maps(d, weyl_group(d).s(0))
    assert f == PolyMap.parse(("X1 + X2", "-X1"))
    assert g == PolyMap.parse(("-X2", "X1 + X2"))


@pytest.mark.parametrize("word", [(0, 1), (1, 0)])
def test_symbolic_a2(word):
    d = build_root_datum("A2")
    f, g = symbolic_xi_maps(d, weyl_group(d).from_word(word))
    assert verify_two_sided_inverse(f, g)
    assert jacobian_det(f).constant_value() in (1, -1)
    # specializations agree with the finite-ring computation
    p = make_problem(d, make_ring("Fq:3"), weyl_group(d).from_word(word))
    G = p.group
    r = make_ring("Z")
    for vals in [(1, 2, 0, 1, 2), (2, 2, 1, 0, 1)]:
        u, z = G.u_element(vals[:3]), G.uw_element(p.w, vals[3:])
        pk, pn = G.cell_coords(p.w, xi(p, u, z))
        img = [v % 3 for v in f.evaluate(r, vals)]
        assert tuple(img) == tuple(pk) + tuple(pn)
