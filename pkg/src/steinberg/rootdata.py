"""Root data, diagram automorphisms, positive roots and Chevalley structure constants.

Conventions:

* ``cartan[i][j] = <i, j'>`` (coroot i against simple root j), so
  ``cartan[i][j] = 2 (i.j) / (i.i)``.
* Vectors in X are integer column vectors in a fixed basis: fundamental weights
  for ``"sc"``, simple roots for ``"ad"``.
* Roots of the root system are tuples of simple-root coefficients.
* Indices are 0-based internally; JSON and CLI use 1-based indices.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = [
    "RootDatum",
    "DatumAutomorphism",
    "RootSystemData",
    "DatumError",
    "cartan_matrix",
    "build_root_datum",
    "make_datum_automorphism",
    "positive_roots_and_constants",
    "datum_from_json",
]

MAX_RANK = 6
MAX_ROOTS = 72

Root = tuple[int, ...]


class DatumError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Cartan types


def _chain_form(n: int, sq: Sequence[int], links: dict[tuple[int, int], int]) -> np.ndarray:
    m = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        m[i, i] = sq[i]
    for (i, j), v in links.items():
        m[i, j] = m[j, i] = v
    return m


def _irreducible_form(letter: str, n: int) -> np.ndarray:
    """Symmetric form (i.j) with short roots of square length 2 (Bourbaki numbering)."""
    if letter == "A" and n >= 1:
        return _chain_form(n, [2] * n, {(i, i + 1): -1 for i in range(n - 1)})
    if letter == "B" and n >= 2:
        return _chain_form(n, [4] * (n - 1) + [2], {(i, i + 1): -2 for i in range(n - 1)})
    if letter == "C" and n >= 2:
        links = {(i, i + 1): -1 for i in range(n - 2)}
        links[(n - 2, n - 1)] = -2
        return _chain_form(n, [2] * (n - 1) + [4], links)
    if letter == "D" and n >= 3:
        links = {(i, i + 1): -1 for i in range(n - 2)}
        links[(n - 3, n - 1)] = -1
        return _chain_form(n, [2] * n, links)
    if letter == "E" and n == 6:
        return _chain_form(6, [2] * 6, {(0, 2): -1, (2, 3): -1, (3, 4): -1, (4, 5): -1, (1, 3): -1})
    if letter == "F" and n == 4:
        return _chain_form(4, [4, 4, 2, 2], {(0, 1): -2, (1, 2): -2, (2, 3): -1})
    if letter == "G" and n == 2:
        return _chain_form(2, [2, 6], {(0, 1): -3})
    raise DatumError(f"unsupported Cartan type {letter}{n}")


def _parse_type(label: str) -> list[tuple[str, int]]:
    parts = [p for p in re.split(r"[x+×\s]+", label.strip()) if p]
    if not parts:
        raise DatumError(f"empty Cartan type {label!r}")
    out = []
    for p in parts:
        m = re.fullmatch(r"([A-G])(\d+)", p)
        if not m:
            raise DatumError(f"malformed Cartan type {label!r}")
        out.append((m.group(1), int(m.group(2))))
    return out


def _block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.int64)
    o = 0
    for b in blocks:
        k = b.shape[0]
        out[o:o + k, o:o + k] = b
        o += k
    return out


def form_for_type(label: str) -> np.ndarray:
    return _block_diag([_irreducible_form(l, n) for l, n in _parse_type(label)])


def cartan_from_form(form: np.ndarray) -> np.ndarray:
    n = form.shape[0]
    c = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            v = Fraction(2 * int(form[i, j]), int(form[i, i]))
            if v.denominator != 1:
                raise DatumError("form does not give an integral Cartan matrix")
            c[i, j] = int(v)
    return c


def cartan_matrix(label: str) -> np.ndarray:
    return cartan_from_form(form_for_type(label))


def _form_from_cartan(cartan: np.ndarray) -> np.ndarray:
    """Recover (i.j) from a symmetrizable Cartan matrix, normalized so short roots have i.i=2."""
    c = np.asarray(cartan, dtype=np.int64)
    n = c.shape[0]
    if c.shape != (n, n):
        raise DatumError("Cartan matrix must be square")
    for i in range(n):
        if c[i, i] != 2:
            raise DatumError("Cartan matrix needs 2 on the diagonal")
        for j in range(n):
            if i != j and c[i, j] > 0:
                raise DatumError(f"<{i + 1},{j + 1}'> = {c[i, j]} is not in -N")
            if i != j and (c[i, j] == 0) != (c[j, i] == 0):
                raise DatumError("Cartan matrix zero pattern is not symmetric")
    # d_i = (i.i)/2, determined along edges from one root per component
    d: list[Fraction | None] = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                if i != j and c[i, j]:
                    # d_i c_ij = d_j c_ji
                    dj = d[i] * int(c[i, j]) / int(c[j, i])
                    if d[j] is None:
                        d[j] = dj
                        stack.append(j)
                    elif d[j] != dj:
                        raise DatumError("Cartan matrix is not symmetrizable")
    # scale each connected component so that its shortest root has i.i = 2
    comp = _components(c)
    scale = [Fraction(1)] * n
    for nodes in comp:
        m = min(d[i] for i in nodes)
        for i in nodes:
            scale[i] = 1 / m
    form = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            v = d[i] * scale[i] * int(c[i, j])
            if v.denominator != 1:
                raise DatumError("cannot normalize the symmetric form to integers")
            form[i, j] = int(v)
    return form


def _components(c: np.ndarray) -> list[list[int]]:
    n = c.shape[0]
    seen = [False] * n
    out = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack, nodes = [s], []
        while stack:
            i = stack.pop()
            nodes.append(i)
            for j in range(n):
                if not seen[j] and c[i, j]:
                    seen[j] = True
                    stack.append(j)
        out.append(sorted(nodes))
    return out


def _det_fraction(m: Sequence[Sequence[int]]) -> Fraction:
    a = [[Fraction(int(x)) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for k in range(col, n):
                    a[r][k] -= f * a[col][k]
    return det


def _classify(cartan: np.ndarray) -> str:
    """Best-effort Cartan type label from an explicit matrix (for display)."""
    labels = []
    for nodes in _components(cartan):
        sub = cartan[np.ix_(nodes, nodes)]
        n = len(nodes)
        found = "?"
        for letter in "ABCDEFG":
            try:
                ref = cartan_matrix(f"{letter}{n}")
            except DatumError:
                continue
            if np.array_equal(ref, sub):
                found = f"{letter}{n}"
                break
        labels.append(found if found != "?" else f"X{n}")
    return "x".join(labels)


# ---------------------------------------------------------------------------
# root datum


@dataclass(frozen=True, eq=False)
class RootDatum:
    """Semisimple root datum with X the weight lattice (``sc``) or root lattice (``ad``)."""

    type_label: str
    cartan: np.ndarray
    form: np.ndarray
    lattice: str
    pairing: np.ndarray          # r x rank_X: <i, basis vector of X>
    simple_roots: np.ndarray     # r x rank_X: row i is i' in X coordinates
    simple_coroots: np.ndarray   # r x rank_X: row i is the coroot i in dual coordinates

    @property
    def rank(self) -> int:
        return self.cartan.shape[0]

    @property
    def rank_X(self) -> int:
        return self.simple_roots.shape[1]

    @property
    def index_set(self) -> range:
        return range(self.rank)

    @property
    def key(self) -> tuple:
        return (self.lattice, self.cartan.tobytes(), self.cartan.shape)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RootDatum) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"RootDatum({self.type_label}, {self.lattice})"

    def pair(self, i: int, x: Sequence[int]) -> int:
        return int(np.dot(self.pairing[i], x))

    def reflection_matrix(self, i: int) -> np.ndarray:
        """Matrix of s_i on X: x -> x - <i,x> i'."""
        return np.eye(self.rank_X, dtype=np.int64) - np.outer(self.simple_roots[i], self.pairing[i])

    def root_to_X(self, root: Sequence[int]) -> np.ndarray:
        return np.asarray(root, dtype=np.int64) @ self.simple_roots

    def inner(self, a: Sequence[int], b: Sequence[int]) -> int:
        return int(np.asarray(a) @ self.form @ np.asarray(b))

    def dot_pair(self, i: int, root: Sequence[int]) -> int:
        """<i, root'> for a root in simple-root coordinates."""
        return int(np.dot(self.cartan[i], root))

    def m(self, i: int, j: int) -> int:
        """Order of s_i s_j."""
        if i == j:
            return 1
        prod = int(self.cartan[i, j] * self.cartan[j, i])
        return {0: 2, 1: 3, 2: 4, 3: 6}[prod]

    @property
    def is_type_A(self) -> bool:
        return all(part.startswith("A") for part in self.type_label.split("x"))

    @cached_property
    def roots(self) -> "RootSystemData":
        return positive_roots_and_constants(self)

    def to_json(self) -> dict:
        return {"type": self.type_label, "lattice": self.lattice,
                "cartan": self.cartan.tolist()}


def build_root_datum(type_or_cartan: str | Sequence[Sequence[int]], lattice: str = "sc") -> RootDatum:
    """Build and validate a root datum.

    >>> build_root_datum("A2").cartan.tolist()
    [[2, -1], [-1, 2]]
    """
    if lattice not in ("sc", "ad"):
        raise DatumError(f"lattice must be 'sc' or 'ad', got {lattice!r}")
    if isinstance(type_or_cartan, str):
        form = form_for_type(type_or_cartan)
        label = "x".join(f"{l}{n}" for l, n in _parse_type(type_or_cartan))
        cartan = cartan_from_form(form)
    else:
        cartan = np.array(type_or_cartan, dtype=np.int64)
        form = _form_from_cartan(cartan)
        label = _classify(cartan)
    r = cartan.shape[0]
    if r < 1 or r > MAX_RANK:
        raise DatumError(f"rank {r} outside 1..{MAX_RANK}")
    # invariants of the form
    for i in range(r):
        if form[i, i] <= 0 or form[i, i] % 2:
            raise DatumError("i.i must lie in 2Z_{>0}")
        for j in range(r):
            if form[i, j] != form[j, i]:
                raise DatumError("form is not symmetric")
            if Fraction(2 * int(form[i, j]), int(form[i, i])) != int(cartan[i, j]):
                raise DatumError("Cartan matrix and form disagree")
            if i != j and cartan[i, j] > 0:
                raise DatumError(f"<{i + 1},{j + 1}'> = {cartan[i, j]} is not in -N")
    for k in range(1, r + 1):
        if _det_fraction(form[:k, :k].tolist()) <= 0:
            raise DatumError("form (i.j) is not positive definite")
    if lattice == "sc":
        pairing = np.eye(r, dtype=np.int64)
        simple_roots = cartan.T.copy()
        simple_coroots = np.eye(r, dtype=np.int64)
    else:
        pairing = cartan.copy()
        simple_roots = np.eye(r, dtype=np.int64)
        simple_coroots = cartan.copy()
    if _det_fraction(simple_roots.tolist()) == 0:
        raise DatumError("simple roots do not span a finite-index subgroup")
    d = RootDatum(label, cartan, form, lattice, pairing, simple_roots, simple_coroots)
    if len(d.roots.positive) > MAX_ROOTS // 2:
        raise DatumError("root count above the desk-scale ceiling")
    return d


def datum_from_json(obj: dict | str) -> tuple[RootDatum, "DatumAutomorphism"]:
    """Read ``{"type"|"cartan", "lattice", "delta"}`` (delta 1-based)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    lattice = obj.get("lattice", "sc")
    if "type" in obj:
        d = build_root_datum(obj["type"], lattice)
    elif "cartan" in obj:
        d = build_root_datum(obj["cartan"], lattice)
    else:
        raise DatumError("datum JSON needs 'type' or 'cartan'")
    perm = obj.get("delta")
    if perm is None:
        perm = list(range(1, d.rank + 1))
    return d, make_datum_automorphism(d, [p - 1 for p in perm])


# ---------------------------------------------------------------------------
# automorphisms


@dataclass(frozen=True, eq=False)
class DatumAutomorphism:
    datum: RootDatum
    perm: tuple[int, ...]        # 0-based: i -> perm[i]
    x_matrix: np.ndarray
    y_matrix: np.ndarray
    order: int

    @property
    def is_identity(self) -> bool:
        return self.order == 1

    def __call__(self, i: int) -> int:
        return self.perm[i]

    def inverse_perm(self) -> tuple[int, ...]:
        inv = [0] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
        return tuple(inv)

    def power(self, k: int) -> tuple[int, ...]:
        p = list(range(len(self.perm)))
        base = self.perm if k >= 0 else self.inverse_perm()
        for _ in range(abs(k)):
            p = [base[i] for i in p]
        return tuple(p)

    def apply_root(self, root: Sequence[int]) -> Root:
        out = [0] * len(root)
        for i, c in enumerate(root):
            out[self.perm[i]] = c
        return tuple(out)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DatumAutomorphism) and other.datum == self.datum \
            and other.perm == self.perm

    def __hash__(self) -> int:
        return hash((self.datum, self.perm))

    def __repr__(self) -> str:
        return f"DatumAutomorphism({[p + 1 for p in self.perm]})"


def make_datum_automorphism(d: RootDatum, perm: Sequence[int] | None = None) -> DatumAutomorphism:
    """δ induced by a 0-based permutation of I (identity if ``perm`` is None)."""
    r = d.rank
    perm = tuple(range(r)) if perm is None else tuple(int(p) for p in perm)
    if sorted(perm) != list(range(r)):
        raise DatumError(f"{[p + 1 for p in perm]} is not a permutation of I")
    for i in range(r):
        for j in range(r):
            if d.form[perm[i], perm[j]] != d.form[i, j]:
                raise DatumError("permutation does not preserve the form i.j")
    # both X bases (fundamental weights / simple roots) are permuted like I
    p = np.zeros((r, r), dtype=np.int64)
    for j in range(r):
        p[perm[j], j] = 1
    order = 1
    cur = list(perm)
    while cur != list(range(r)):
        cur = [perm[c] for c in cur]
        order += 1
    delta = DatumAutomorphism(d, perm, p, p.copy(), order)
    # <δy, δx> = <y, x> on the simple data
    for i in range(r):
        if not np.array_equal(p @ d.simple_roots[i], d.simple_roots[perm[i]]):
            raise DatumError("δ does not map i' to δ(i)'")
        if not np.array_equal(d.pairing[perm[i]] @ p, d.pairing[i]):
            raise DatumError("δ does not preserve the pairing")
    return delta


# ---------------------------------------------------------------------------
# roots and structure constants


@dataclass(eq=False)
class RootSystemData:
    datum: RootDatum
    positive: list[Root]
    heights: dict[Root, int]
    constants: dict[tuple[Root, Root], int] = field(default_factory=dict)
    extraspecial: dict[Root, tuple[Root, Root]] = field(default_factory=dict)

    @cached_property
    def all_roots(self) -> list[Root]:
        return self.positive + [tuple(-c for c in r) for r in self.positive]

    @cached_property
    def root_set(self) -> frozenset[Root]:
        return frozenset(self.all_roots)

    def is_root(self, r: Root) -> bool:
        return r in self.root_set

    def N(self, a: Root, b: Root) -> int:
        """Structure constant N_{a,b} ([e_a, e_b] = N e_{a+b}); 0 if a+b is not a root."""
        return self.constants.get((a, b), 0)

    def string_p(self, a: Root, b: Root) -> int:
        """Largest p with b - p a a root."""
        p = 0
        while self.is_root(tuple(x - (p + 1) * y for x, y in zip(b, a))):
            p += 1
        return p


def _neg(r: Root) -> Root:
    return tuple(-c for c in r)


def _add(a: Root, b: Root) -> Root:
    return tuple(x + y for x, y in zip(a, b))


def positive_roots_and_constants(d: RootDatum) -> RootSystemData:
    r = d.rank
    simple = [tuple(1 if k == i else 0 for k in range(r)) for i in range(r)]
    found = set(simple)
    frontier = list(simple)
    while frontier:
        nxt = []
        for beta in frontier:
            for i in range(r):
                c = d.dot_pair(i, beta)
                img = tuple(b - (c if k == i else 0) for k, b in enumerate(beta))
                if all(x >= 0 for x in img) and any(img) and img not in found:
                    found.add(img)
                    nxt.append(img)
        frontier = nxt
        if len(found) > MAX_ROOTS:
            raise DatumError("root count above the desk-scale ceiling")
    positive = sorted(found, key=lambda a: (sum(a), a))
    heights = {a: sum(a) for a in positive}
    data = RootSystemData(d, positive, heights)
    _structure_constants(d, data)
    return data


def _structure_constants(d: RootDatum, data: RootSystemData) -> None:
    pos = data.positive
    pos_set = set(pos)
    is_root = data.is_root
    inner = d.inner
    table: dict[tuple[Root, Root], int] = {}

    def n_mixed(a: Root, b: Root) -> int:
        """N_{a,b} for any roots, using values at lower heights."""
        c = _add(a, b)
        if not is_root(c):
            return 0
        key = (a, b)
        if key in table:
            return table[key]
        a_pos, b_pos = a in pos_set, b in pos_set
        if a_pos and b_pos:
            raise AssertionError(f"positive pair {a},{b} requested before it was set")
        if not a_pos and not b_pos:
            val = -n_mixed(_neg(a), _neg(b))
        else:
            if not a_pos:
                # N_{a,b} = -N_{b,a}
                return -n_mixed(b, a)
            # a > 0 > b; the three roots a, b, -c sum to zero:
            # N_{a,b}/(c,c) = N_{b,-c}/(a,a) = N_{-c,a}/(b,b)
            if c in pos_set:
                val = Fraction(inner(c, c), inner(a, a)) * n_mixed(b, _neg(c))
            else:
                val = Fraction(inner(c, c), inner(b, b)) * n_mixed(_neg(c), a)
            assert val.denominator == 1
            val = int(val)
        table[key] = val
        return val

    for zeta in pos:
        if data.heights[zeta] < 2:
            continue
        pairs = [(xi, _sub(zeta, xi)) for xi in pos if _sub(zeta, xi) in pos_set]
        alpha = min((p[0] for p in pairs), key=lambda a: (sum(a), a))
        beta = _sub(zeta, alpha)
        n_ab = data.string_p(alpha, beta) + 1
        data.extraspecial[zeta] = (alpha, beta)
        table[(alpha, beta)] = n_ab
        table[(beta, alpha)] = -n_ab
        for xi, eta in pairs:
            if (xi, eta) in table:
                continue
            # four-root relation for (xi, eta, -alpha, -beta), with N_{-a,-b} = -N_{a,b}
            s = Fraction(0)
            t1 = _sub(eta, alpha)
            if is_root(t1):
                s += Fraction(n_mixed(eta, _neg(alpha)) * n_mixed(xi, _neg(beta)), inner(t1, t1))
            t2 = _sub(xi, alpha)
            if is_root(t2):
                s += Fraction(n_mixed(_neg(alpha), xi) * n_mixed(eta, _neg(beta)), inner(t2, t2))
            val = Fraction(inner(zeta, zeta), n_ab) * s
            assert val.denominator == 1, "non-integral structure constant"
            table[(xi, eta)] = int(val)
            table[(eta, xi)] = -int(val)
    # fill every pair of roots
    for a in data.all_roots:
        for b in data.all_roots:
            if a != _neg(b) and is_root(_add(a, b)):
                n = n_mixed(a, b)
                if abs(n) != data.string_p(a, b) + 1:
                    raise DatumError("structure constant magnitude disagrees with root string")
                data.constants[(a, b)] = n


def _sub(a: Root, b: Root) -> Root:
    return tuple(x - y for x, y in zip(a, b))
