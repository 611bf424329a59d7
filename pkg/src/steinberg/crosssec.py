"""The map Ξ^w(u, z) = u z π(u)^{-1} and its constructive inverse.

The inverse is built for a good element of C_min (braid transport of
[g, π(g), ..., π^{e-1}(g)] to a tuple starting with w_I, then reading off the U
tail) and carried to any other w in C_min along elementary cyclic shifts.

Also here: α^w, T_w from a Smith normal form, the Steinberg slice
Σ = ẇ U^w, orbit counts, the Spaltenstein example and symbolic coordinate maps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy
from sympy.matrices.normalforms import invariant_factors

from .braid import BraidMove, braid_move_path, find_good_element, good_decomposition, refine
from .chevalley import (
    ChevalleyError,
    ChevalleyGroup,
    GroupElement,
    LetterChain,
    MembershipError,
    Twist,
    chain_to_point,
    chevalley_group,
    h_tilde,
    zeta,
)
from .polyfam import PolyMap, variables
from .rings import Poly, RingDescriptor, RingMap, identity_map, make_ring
from .rootdata import DatumAutomorphism, RootDatum, build_root_datum, make_datum_automorphism
from .weyl import ShiftStep, TwistedClass, WeylElement, class_of, shift_path, twisted_matrix

__all__ = [
    "CrossSectionError",
    "CrossSectionProblem",
    "InverseDescriptor",
    "TwInvariants",
    "make_problem",
    "xi",
    "build_inverse",
    "xi_inverse",
    "alpha",
    "alpha_domain",
    "t_w_invariants",
    "sigma_unipotent_count",
    "orbit_count",
    "spaltenstein_demo",
    "verify_theorem",
    "symbolic_xi_maps",
]


class CrossSectionError(ValueError):
    pass


@dataclass(eq=False)
class CrossSectionProblem:
    group: ChevalleyGroup
    delta: DatumAutomorphism
    chi: RingMap
    class_c: TwistedClass
    w: WeylElement

    @property
    def datum(self) -> RootDatum:
        return self.group.datum

    @property
    def ring(self) -> RingDescriptor:
        return self.group.ring

    @property
    def k(self) -> int:
        return self.w.length

    @property
    def n(self) -> int:
        return self.group.n

    @property
    def N(self) -> int:
        return self.k + self.n

    @cached_property
    def pi(self) -> Twist:
        return self.group.twist_map(self.delta, self.chi)

    @cached_property
    def w_lift(self) -> GroupElement:
        return self.group.lift(self.w)

    def config(self) -> dict:
        d = self.datum
        return {
            "type": d.type_label,
            "lattice": d.lattice,
            "representation": self.group.rep.name,
            "ring": self.ring.spec,
            "delta": [i + 1 for i in self.delta.perm],
            "chi": self.chi.describe(),
            "w": [i + 1 for i in self.w.word],
        }


def make_problem(datum: RootDatum, ring: RingDescriptor, w: WeylElement,
                 delta: DatumAutomorphism | None = None, chi: RingMap | None = None,
                 rep: str | None = None) -> CrossSectionProblem:
    if delta is None:
        delta = make_datum_automorphism(datum)
    if chi is None:
        chi = identity_map(ring)
    if chi.source != ring or chi.target != ring:
        raise CrossSectionError("χ must be an endomorphism of the ring")
    if ring.is_finite:
        chi.order()  # raises unless χ is an automorphism
    elif not chi.is_identity:
        raise CrossSectionError("only χ = id is supported over infinite rings")
    c = class_of(w, delta)
    if not c.elliptic:
        raise CrossSectionError(f"the class of {w} is not δ-elliptic")
    if w not in c.min_length_elements:
        raise CrossSectionError(f"{w} is not of minimal length in its class")
    return CrossSectionProblem(chevalley_group(datum, ring, rep), delta, chi, c, w)


# ---------------------------------------------------------------------------
# Ξ


def _check_uw(p: CrossSectionProblem, z: GroupElement) -> None:
    if p.group.cell(p.w.word).coords_of(z) is None:
        raise MembershipError("z is not in U^w ẇ")


def xi(p: CrossSectionProblem, u: GroupElement, z: GroupElement) -> GroupElement:
    if not p.group.in_U(u):
        raise MembershipError("u is not in U")
    _check_uw(p, z)
    return u * z * p.pi(u).inverse()


# ---------------------------------------------------------------------------
# inverse


@dataclass(eq=False)
class InverseDescriptor:
    problem: CrossSectionProblem
    good_w: WeylElement
    e: int
    y_star: tuple[WeylElement, ...]
    transport_path: list[ShiftStep]
    moves: tuple[BraidMove, ...]
    _good: CrossSectionProblem = field(default=None, repr=False)

    @property
    def x_star(self) -> tuple[WeylElement, ...]:
        d = self.problem.delta
        return tuple(self.good_w.twist(d, j) for j in range(self.e))

    def __call__(self, g: GroupElement) -> tuple[GroupElement, GroupElement]:
        return xi_inverse(self, g)

    def to_json(self) -> dict:
        return {
            "good_w": [i + 1 for i in self.good_w.word],
            "e": self.e,
            "y_star": [[i + 1 for i in y.word] for y in self.y_star],
            "transport_path": [s.to_json() for s in self.transport_path],
            "braid_moves": [m.to_json() for m in self.moves],
        }


def build_inverse(p: CrossSectionProblem, start: WeylElement | None = None) -> InverseDescriptor:
    """Inverse of Ξ^w from a good element (``start``, default the first one in C_min)."""
    c = p.class_c
    good = find_good_element(c) if start is None else start
    dec = good_decomposition(good, p.delta)
    if dec is None:
        raise CrossSectionError(f"{good} is not a good element")
    e, y_star = dec
    x_star = tuple(good.twist(p.delta, j) for j in range(e))
    moves = tuple(braid_move_path(p.datum, refine(x_star), refine(y_star)))
    path = shift_path(c, good, p.w)
    gp = CrossSectionProblem(p.group, p.delta, p.chi, c, good)
    return InverseDescriptor(p, good, e, tuple(y_star), path, moves, gp)


def xi_inverse(inv: InverseDescriptor, g: GroupElement) -> tuple[GroupElement, GroupElement]:
    """The unique (u, z) with Ξ^w(u, z) = g."""
    p = inv.problem
    p.group.split(p.w, g)  # raises MembershipError outside the cell
    return _invert(inv, len(inv.transport_path), g)


def _invert(inv: InverseDescriptor, level: int, h: GroupElement):
    if level == 0:
        return _invert_good(inv, h)
    step = inv.transport_path[level - 1]
    p = inv.problem
    G, pi = p.group, p.pi
    x, y = step.x, step.y
    dy = y.twist(p.delta)
    lx, ly = x.length, y.length

    def known(h2):
        return _invert(inv, level - 1, h2)

    if step.forward:
        # known x δ(y), new y x
        coords = G.split(step.end, h, y.word + x.word)[0]
        a = G.cell(y.word).element(coords[:ly])
        b = a.inverse() * h
        u, g_all = known(b * pi(a))
        gc = _coords(G, x.word + dy.word, g_all)
        g = G.cell(x.word).element(gc[:lx])
        c = pi.inverse(G.cell(dy.word).element(gc[lx:]))
        return a * u * c.inverse(), c * g
    # known y x, new x δ(y)
    coords = G.split(step.end, h, x.word + dy.word)[0]
    a = G.cell(x.word).element(coords[:lx])
    b = a.inverse() * h
    up, g_all = known(pi.inverse(b) * a)
    gc = _coords(G, y.word + x.word, g_all)
    c = G.cell(y.word).element(gc[:ly])
    d = G.cell(x.word).element(gc[ly:])
    return a * pi(up) * d.inverse(), d * pi(c)


def _coords(G: ChevalleyGroup, word: tuple[int, ...], z: GroupElement) -> tuple:
    c = G.cell(word).coords_of(z)
    if c is None:
        raise ChevalleyError("transport produced an element outside U^w ẇ")  # pragma: no cover
    return c


def _invert_good(inv: InverseDescriptor, g: GroupElement):
    p = inv._good
    G, pi, e = p.group, p.pi, inv.e
    carry = G.identity
    coords: tuple = ()
    cur = g
    x_star = inv.x_star
    for xw in x_star:
        zc, _, carry = G.split(xw, carry * cur)
        coords += zc
        cur = pi(cur)
    chain = LetterChain(refine(x_star), coords, carry)
    point = h_tilde(G, inv.moves, chain_to_point(G, chain, x_star), inv.y_star)
    _, u = zeta(G, point)
    a = pi.power(u, -e)
    h = a * g * pi(a).inverse()
    _, z, rest = G.split(p.w, h)
    if not rest.is_identity():
        raise ChevalleyError("good-element inverse left a nontrivial U factor")
    return a.inverse(), z


# ---------------------------------------------------------------------------
# α


def alpha_domain(p: CrossSectionProblem) -> tuple[list[GroupElement], list[GroupElement]]:
    """(^vU, U^w) with v = δ^{-1}(w)^{-1}, enumerated over a finite ring."""
    G = p.group
    v = p.w.twist(p.delta, -1).inverse()
    vd = G.lift(v)
    left = [u for _, u in G.u_items if G.in_U(vd.inverse() * u * vd)]
    wd_inv = p.w_lift.inverse()
    right = [z * wd_inv for _, z in G.cell(p.w.word).items()]
    return left, right


def alpha(p: CrossSectionProblem, u1: GroupElement, u2: GroupElement) -> GroupElement:
    """u' u'' ẇ π(u')^{-1} ẇ^{-1}."""
    G = p.group
    v = p.w.twist(p.delta, -1).inverse()
    vd = G.lift(v)
    wd = p.w_lift
    if not G.in_U(u1) or not G.in_U(vd.inverse() * u1 * vd):
        raise MembershipError("u' is not in ^vU")
    if not G.in_U(u2) or G.cell(p.w.word).coords_of(u2 * wd) is None:
        raise MembershipError("u'' is not in U^w")
    return u1 * u2 * wd * p.pi(u1).inverse() * wd.inverse()


# ---------------------------------------------------------------------------
# T_w


@dataclass(frozen=True)
class TwInvariants:
    factors: tuple[int, ...]      # nontrivial invariant factors
    order: int
    det: int

    def to_json(self) -> dict:
        return {"invariant_factors": list(self.factors), "order": self.order, "det": self.det}


def t_w_invariants(p_or_w, delta: DatumAutomorphism | None = None) -> TwInvariants:
    """Invariant factors of coker(wδ - 1) on X."""
    if isinstance(p_or_w, CrossSectionProblem):
        w, delta = p_or_w.w, p_or_w.delta
    else:
        w = p_or_w
        delta = delta or make_datum_automorphism(w.datum)
    m = twisted_matrix(w, delta) - np.eye(w.datum.rank_X, dtype=np.int64)
    M = sympy.Matrix(m.tolist())
    det = int(M.det())
    if det == 0:
        raise CrossSectionError("wδ - 1 is singular: w is not elliptic")
    facs = [abs(int(f)) for f in invariant_factors(M, domain=sympy.ZZ)]
    nontrivial = tuple(f for f in facs if f != 1)
    order = 1
    for f in nontrivial:
        order *= f
    if order != abs(det):  # pragma: no cover
        raise CrossSectionError("Smith normal form disagrees with the determinant")
    return TwInvariants(nontrivial, order, det)


# ---------------------------------------------------------------------------
# Σ = ẇ U^w


def _is_unipotent(G: ChevalleyGroup, g: GroupElement) -> bool:
    b, r = G.backend, G.ring
    n = G.dim
    m = b.add(g.mat, b.scale(r.neg(r.one()), b.identity(n)))
    acc = m
    for _ in range(n - 1):
        acc = b.mul(acc, m)
    return b.equal(acc, b.zeros(n))


def sigma_unipotent_count(p: CrossSectionProblem) -> tuple[int, list[GroupElement]]:
    """Unipotent elements of Σ(F_q) = ẇ U^w(F_q)."""
    G = p.group
    if G.rep.kind != "defining" or not G.ring.is_finite or not G.ring.is_field:
        raise CrossSectionError("the unipotence test needs the defining type A model over a finite field")
    wd = p.w_lift
    found = []
    for _, z in G.cell(p.w.word).items():
        s = wd * (z * wd.inverse())
        if _is_unipotent(G, s):
            found.append(s)
    return len(found), found


# ---------------------------------------------------------------------------
# orbits and exhaustive verification


def _cell_points(p: CrossSectionProblem) -> list[tuple[tuple, tuple, GroupElement]]:
    G = p.group
    return [(zc, uc, z * u) for zc, z in G.cell(p.w.word).items() for uc, u in G.u_items]


def orbit_count(p: CrossSectionProblem) -> dict:
    """U-orbits on UẇU under g -> u g π(u)^{-1}."""
    G = p.group
    if not G.ring.is_finite:
        raise CrossSectionError("orbit counting needs a finite ring")
    twisted = [(u, p.pi(u).inverse()) for _, u in G.u_items]
    seen: set = set()
    sizes = []
    for _, _, g in _cell_points(p):
        if g.key in seen:
            continue
        orbit = {(u * g * pu).key for u, pu in twisted}
        seen |= orbit
        sizes.append(len(orbit))
    u_size = len(G.u_items)
    return {
        "orbits": len(sizes),
        "expected_orbits": G.ring.size ** p.k,
        "orbit_sizes": sorted(set(sizes)),
        "free": all(s == u_size for s in sizes),
        "u_size": u_size,
        "cell_size": len(seen),
    }


def verify_theorem(p: CrossSectionProblem, inverse: InverseDescriptor | None = None,
                   check_inverse: bool = True, timings: bool = False) -> dict:
    """Exhaustive injectivity/surjectivity of Ξ^w plus a pointwise check of the inverse."""
    G = p.group
    if not G.ring.is_finite:
        raise CrossSectionError("exhaustive verification needs a finite ring")
    t0 = time.perf_counter()
    cell = {g.key: (zc, uc) for zc, uc, g in _cell_points(p)}
    preimage: dict = {}
    witnesses = []
    in_cell = True
    uw = G.cell(p.w.word).items()
    for uc, u in G.u_items:
        pu = p.pi(u).inverse()
        for zc, z in uw:
            key = (u * z * pu).key
            if key not in cell:
                in_cell = False
                witnesses.append({"u": list(uc), "z": list(zc), "reason": "image outside cell"})
            if key in preimage:
                witnesses.append({"u": list(uc), "z": list(zc), "reason": "collision"})
            preimage[key] = (uc, zc)
    points = len(G.u_items) * len(uw)
    injective = len(preimage) == points
    surjective = in_cell and len(preimage) == len(cell)
    t1 = time.perf_counter()
    report = {
        "config": p.config(),
        "points": points,
        "cell_size": len(cell),
        "injective": injective,
        "surjective": surjective,
    }
    if check_inverse:
        inv = inverse or build_inverse(p)
        ok = True
        for zc, uc, g in _cell_points(p):
            u, z = xi_inverse(inv, g)
            got = (G.u_coords(u), G.cell(p.w.word).coords_of(z))
            if got != preimage.get(g.key):
                ok = False
                witnesses.append({"cell_point": [list(zc), list(uc)], "reason": "inverse mismatch"})
                break
        report["inverse_ok"] = ok
        report["inverse"] = inv.to_json()
    report["witnesses"] = witnesses[:5]
    if timings:
        report["timings"] = {"xi": round(t1 - t0, 3), "inverse": round(time.perf_counter() - t1, 3)}
    return report


# ---------------------------------------------------------------------------
# Spaltenstein's example in type A5


_SPALT_W = [[0, 0, 1, 0, 0, 0], [0, 0, 0, 0, 1, 0], [0, 1, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 1], [0, 0, 0, 1, 0, 0], [1, 0, 0, 0, 0, 0]]
_SPALT_Y = [[1, 0, -1, 0, 0, 0], [0, 1, 1, 0, 0, 0], [0, 0, 1, 0, 0, 0],
            [0, 0, 0, 1, 1, -1], [0, 0, 0, 0, 1, 0], [0, 0, 0, 0, 0, 1]]
_SPALT_X_ENTRIES = [(1, 3), (1, 5), (2, 3), (2, 5)]   # 0-based positions of x in u_x


def spaltenstein_matrices(G: ChevalleyGroup, x) -> tuple[GroupElement, GroupElement, GroupElement]:
    r = G.ring
    wd = G.element([[r.from_int(v) for v in row] for row in _SPALT_W])
    yy = G.element([[r.from_int(v) for v in row] for row in _SPALT_Y])
    rows = [[r.one() if i == j else r.zero() for j in range(6)] for i in range(6)]
    for i, j in _SPALT_X_ENTRIES:
        rows[i][j] = x
    return wd, G.element(rows), yy


def _stabilizer_dimension(G: ChevalleyGroup, m: GroupElement) -> int:
    """dim of {N strictly upper : N M = M N} over the prime field (q = p)."""
    r = G.ring
    p = r.modulus
    pay = G.backend.to_payloads(m.mat)
    M = sympy.Matrix([[int(v) for v in row] for row in pay])
    slots = [(i, j) for i in range(6) for j in range(i + 1, 6)]
    cols = []
    for i, j in slots:
        E = sympy.zeros(6, 6)
        E[i, j] = 1
        cols.append(list(E * M - M * E))
    A = sympy.Matrix(cols).T
    return len(slots) - _rank_mod_p(A, p)


def _rank_mod_p(A: "sympy.Matrix", p: int) -> int:
    rows = [[int(v) % p for v in A.row(i)] for i in range(A.rows)]
    rank, col = 0, 0
    ncols = A.cols
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [v * inv % p for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def spaltenstein_demo(ring: RingDescriptor, exhaustive_limit: int = 2**16) -> dict:
    d = build_root_datum("A5", "sc")
    G = chevalley_group(d, ring)
    report: dict = {"ring": ring.spec}
    if ring.kind == "PolynomialsOverZ":
        x = ring.parse(ring.variables[0])
        wd, ux, yy = spaltenstein_matrices(G, x)
        yw = yy * wd
        report["identity_holds"] = ux * yw * ux.inverse() == yw
        report["u_x_in_U"] = G.in_U(ux)
        return report
    if not ring.is_finite:
        raise CrossSectionError("the Spaltenstein check needs PolyZ:x or a finite ring")
    holds = True
    for x in ring.elements():
        wd, ux, yy = spaltenstein_matrices(G, x)
        yw = yy * wd
        holds &= ux * yw * ux.inverse() == yw
    report["identity_holds"] = holds
    wd, _, yy = spaltenstein_matrices(G, ring.zero())
    yw = yy * wd
    u_size = ring.size ** 15
    report["u_size"] = u_size
    report["isotropy_lower_bound"] = ring.size   # the one-parameter group x -> u_x
    if ring.is_residue and ring.is_field:
        dim = _stabilizer_dimension(G, yw)
        report["isotropy_size"] = ring.size ** dim
    if u_size <= exhaustive_limit:
        stab = sum(1 for _, u in G.u_items if u * yw == yw * u)
        report["isotropy_size_exhaustive"] = stab
        report["isotropy_size"] = stab
    iso = report.get("isotropy_size")
    if iso is not None:
        report["orbit_size"] = u_size // iso
        report["action_free"] = iso == 1
    return report


# ---------------------------------------------------------------------------
# symbolic coordinate maps


def symbolic_xi_maps(datum: RootDatum, w: WeylElement) -> tuple[PolyMap, PolyMap]:
    """(Ξ, Ξ') as integer polynomial maps of A^N, N = l(w) + l(w_I), δ = χ = 1.

    Ξ sends (u coordinates, z coordinates) to cell coordinates (part_k, part_n);
    Ξ' is computed by running the inverse algorithm over Z[X1..XN].
    """
    n = weyl_w_I_length(datum)
    N = w.length + n
    R = make_ring("PolyZ:" + ",".join(variables(N)))
    p = make_problem(datum, R, w)
    G = p.group
    X = [Poly.var(N, i) for i in range(N)]
    u = G.u_element(X[:n])
    z = G.cell(w.word).element(X[n:])
    g = u * z
    g = g * p.pi(u).inverse()
    pk, pn = G.cell_coords(w, g)
    forward = PolyMap(N, tuple(pk) + tuple(pn))
    cell_pt = G.cell(w.word).element(X[:w.length]) * G.u_element(X[w.length:])
    inv = build_inverse(p)
    uu, zz = xi_inverse(inv, cell_pt)
    uc = G.u_coords(uu)
    zc = G.cell(w.word).coords_of(zz)
    if uc is None or zc is None:  # pragma: no cover
        raise CrossSectionError("symbolic inverse left the domain")
    backward = PolyMap(N, tuple(uc) + tuple(zc))
    return forward, backward


def weyl_w_I_length(datum: RootDatum) -> int:
    return len(datum.roots.positive)
