"""Weyl groups acting on X, δ-twisted classes, minimal length elements, cyclic shifts."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .rootdata import DatumAutomorphism, RootDatum, _det_fraction, make_datum_automorphism

__all__ = [
    "WeylElement",
    "WeylGroup",
    "TwistedClass",
    "ShiftEdge",
    "ShiftStep",
    "WeylError",
    "weyl_group",
    "element_from_word",
    "longest_element",
    "delta_classes",
    "min_length_set",
    "shift_path",
    "format_word",
    "parse_word",
]

ENUMERATION_CEILING = 10**5


class WeylError(ValueError):
    pass


def format_word(word: Sequence[int]) -> str:
    """1-based comma separated letters."""
    return ",".join(str(i + 1) for i in word)


def parse_word(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(int(t) - 1 for t in text.split(","))


Matrix = tuple[tuple[int, ...], ...]


def _as_key(m: np.ndarray) -> Matrix:
    return tuple(tuple(int(v) for v in row) for row in m)


@dataclass(frozen=True, eq=False)
class WeylElement:
    group: "WeylGroup" = field(repr=False)
    key: Matrix
    word: tuple[int, ...]

    @property
    def action(self) -> np.ndarray:
        return np.array(self.key, dtype=np.int64)

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def datum(self) -> RootDatum:
        return self.group.datum

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WeylElement) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return self.group.from_matrix(self.action @ other.action)

    def inverse(self) -> "WeylElement":
        return self.group.from_word(tuple(reversed(self.word)))

    def is_identity(self) -> bool:
        return not self.word

    def twist(self, delta: DatumAutomorphism, k: int = 1) -> "WeylElement":
        """δ^k(w)."""
        p = delta.power(k)
        return self.group.from_word(tuple(p[i] for i in self.word))

    def __repr__(self) -> str:
        return f"W[{format_word(self.word)}]" if self.word else "W[]"

    def __lt__(self, other: "WeylElement") -> bool:
        return (self.length, self.word) < (other.length, other.word)


class WeylGroup:
    """Weyl group of a root datum, realized on X."""

    def __init__(self, datum: RootDatum):
        self.datum = datum
        self.rank = datum.rank
        self.gens = [datum.reflection_matrix(i) for i in range(self.rank)]
        roots = datum.roots
        self._pos_X = np.array([datum.root_to_X(a) for a in roots.positive], dtype=np.int64)
        self._neg_keys = {tuple(-v for v in datum.root_to_X(a)) for a in roots.positive}
        self._cache: dict[Matrix, WeylElement] = {}
        self.identity = self.from_matrix(np.eye(datum.rank_X, dtype=np.int64))

    def _length(self, m: np.ndarray) -> int:
        imgs = self._pos_X @ m.T
        return sum(1 for v in imgs if tuple(int(x) for x in v) in self._neg_keys)

    def from_matrix(self, m: np.ndarray) -> WeylElement:
        key = _as_key(m)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        # canonical word: repeatedly strip the smallest left descent
        word = []
        cur = np.array(m, dtype=np.int64)
        length = self._length(cur)
        while length:
            for i in range(self.rank):
                nxt = self.gens[i] @ cur
                nl = self._length(nxt)
                if nl < length:
                    word.append(i)
                    cur, length = nxt, nl
                    break
            else:  # pragma: no cover - only reachable for a non-Weyl matrix
                raise WeylError("matrix is not in the Weyl group")
        if not np.array_equal(cur, np.eye(self.datum.rank_X, dtype=np.int64)):
            raise WeylError("matrix is not in the Weyl group")
        el = WeylElement(self, key, tuple(word))
        self._cache[key] = el
        return el

    def from_word(self, word: Iterable[int]) -> WeylElement:
        m = np.eye(self.datum.rank_X, dtype=np.int64)
        for i in word:
            if not 0 <= i < self.rank:
                raise WeylError(f"letter {i + 1} not in I")
            m = m @ self.gens[i]
        return self.from_matrix(m)

    def s(self, i: int) -> WeylElement:
        return self.from_word((i,))

    @cached_property
    def longest(self) -> WeylElement:
        w = self.identity
        while True:
            for i in range(self.rank):
                ws = w * self.s(i)
                if ws.length > w.length:
                    w = ws
                    break
            else:
                return w

    @cached_property
    def elements(self) -> list[WeylElement]:
        """All elements sorted by (length, canonical word)."""
        seen = {self.identity.key: self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for w in frontier:
                for i in range(self.rank):
                    v = self.from_matrix(self.gens[i] @ w.action)
                    if v.key not in seen:
                        seen[v.key] = v
                        nxt.append(v)
                        if len(seen) > ENUMERATION_CEILING:
                            raise WeylError("Weyl group exceeds the enumeration ceiling")
            frontier = nxt
        return sorted(seen.values())

    def left_descents(self, w: WeylElement) -> set[int]:
        return {i for i in range(self.rank) if (self.s(i) * w).length < w.length}

    def right_descents(self, w: WeylElement) -> set[int]:
        return {i for i in range(self.rank) if (w * self.s(i)).length < w.length}

    def is_reduced(self, word: Sequence[int]) -> bool:
        return self.from_word(word).length == len(word)

    def support(self, w: WeylElement) -> frozenset[int]:
        return frozenset(w.word)


@lru_cache(maxsize=None)
def weyl_group(d: RootDatum) -> WeylGroup:
    return WeylGroup(d)


def element_from_word(d: RootDatum, word: Sequence[int]) -> WeylElement:
    """Element of W for a 0-based word; stores the lexicographically least reduced word."""
    return weyl_group(d).from_word(word)


def longest_element(d: RootDatum) -> WeylElement:
    return weyl_group(d).longest


# ---------------------------------------------------------------------------
# twisted classes


@dataclass(frozen=True)
class ShiftEdge:
    """w_h = x δ(y) and w_{h+1} = y x, with l(x)+l(y) equal to both lengths."""

    source: WeylElement   # w_h = x δ(y)
    target: WeylElement   # w_{h+1} = y x
    x: WeylElement
    y: WeylElement


@dataclass(frozen=True)
class ShiftStep:
    """One traversal of a shift edge; ``forward`` means from x δ(y) to y x."""

    start: WeylElement
    end: WeylElement
    x: WeylElement
    y: WeylElement
    forward: bool

    def to_json(self) -> dict:
        return {"from": format_word(self.start.word), "to": format_word(self.end.word),
                "x": format_word(self.x.word), "y": format_word(self.y.word),
                "direction": "forward" if self.forward else "backward"}


@dataclass(eq=False)
class TwistedClass:
    delta: DatumAutomorphism
    elements: frozenset[WeylElement]
    min_length_elements: tuple[WeylElement, ...]
    elliptic: bool
    elliptic_det: bool
    order_e: int

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def min_length(self) -> int:
        return self.min_length_elements[0].length

    @property
    def representative(self) -> WeylElement:
        return self.min_length_elements[0]

    def __contains__(self, w: WeylElement) -> bool:
        return w in self.elements

    def __repr__(self) -> str:
        return (f"TwistedClass(repr={self.representative}, size={self.size}, "
                f"elliptic={self.elliptic})")

    @cached_property
    def shift_graph(self) -> list[ShiftEdge]:
        return _shift_edges(self)

    def to_json(self) -> dict:
        return {"repr_word": format_word(self.representative.word), "size": self.size,
                "elliptic": self.elliptic, "min_length": self.min_length,
                "c_min_words": [format_word(w.word) for w in self.min_length_elements],
                "order_e": self.order_e}


def twisted_matrix(w: WeylElement, delta: DatumAutomorphism) -> np.ndarray:
    """Matrix of wδ on X."""
    return w.action @ delta.x_matrix


def order_e(w: WeylElement, delta: DatumAutomorphism) -> int:
    """Order of wδ in W ⋊ <δ>."""
    m = twisted_matrix(w, delta)
    cur = m.copy()
    one = np.eye(m.shape[0], dtype=np.int64)
    e = 1
    while not np.array_equal(cur, one):
        cur = cur @ m
        e += 1
        if e > 10**4:  # pragma: no cover
            raise WeylError("order search did not terminate")
    return e


def _delta_closure(J: Iterable[int], delta: DatumAutomorphism) -> frozenset[int]:
    out = set(J)
    for j in list(out):
        k = j
        for _ in range(delta.order):
            k = delta(k)
            out.add(k)
    return frozenset(out)


def delta_classes(d: RootDatum, delta: DatumAutomorphism | None = None) -> list[TwistedClass]:
    """Partition W into δ-conjugacy classes, sorted by (minimal length, representative word)."""
    if delta is None:
        delta = make_datum_automorphism(d)
    W = weyl_group(d)
    elements = W.elements
    gens = [W.s(i) for i in range(d.rank)]
    dgens = [g.twist(delta) for g in gens]
    seen: set[WeylElement] = set()
    classes = []
    full = frozenset(range(d.rank))
    for start in elements:
        if start in seen:
            continue
        orbit = {start}
        queue = deque([start])
        while queue:
            w = queue.popleft()
            for g, dg in zip(gens, dgens):
                v = g * w * dg          # y^{-1} w δ(y) with y = s_i
                if v not in orbit:
                    orbit.add(v)
                    queue.append(v)
        seen |= orbit
        lmin = min(w.length for w in orbit)
        cmin = tuple(sorted(w for w in orbit if w.length == lmin))
        elliptic = all(_delta_closure(W.support(w), delta) == full for w in orbit)
        m = twisted_matrix(cmin[0], delta) - np.eye(d.rank_X, dtype=np.int64)
        elliptic_det = _det_fraction(m.tolist()) != 0
        classes.append(TwistedClass(delta, frozenset(orbit), cmin, elliptic, elliptic_det,
                                    order_e(cmin[0], delta)))
    classes.sort(key=lambda c: (c.min_length, c.representative.word))
    return classes


def class_of(w: WeylElement, delta: DatumAutomorphism) -> TwistedClass:
    for c in delta_classes(w.datum, delta):
        if w in c:
            return c
    raise WeylError("element not found in any class")  # pragma: no cover


def _shift_edges(c: TwistedClass) -> list[ShiftEdge]:
    W = weyl_group(c.delta.datum)
    delta = c.delta
    lmin = c.min_length
    edges = []
    seen = set()
    for target in c.min_length_elements:          # target = y x
        for y in W.elements:
            x = y.inverse() * target
            if x.length + y.length != lmin:
                continue
            source = x * y.twist(delta)           # source = x δ(y)
            if source.length != lmin or source == target:
                continue
            if (source, target) in seen:
                continue
            seen.add((source, target))
            edges.append(ShiftEdge(source, target, x, y))
    return edges


def min_length_set(c: TwistedClass) -> tuple[tuple[WeylElement, ...], list[ShiftEdge]]:
    """C_min together with the elementary shift graph.

    Connectivity is only guaranteed (and checked) for elliptic classes.
    """
    edges = c.shift_graph
    nodes = c.min_length_elements
    if c.elliptic and len(nodes) > 1:
        adj: dict[WeylElement, set[WeylElement]] = {w: set() for w in nodes}
        for e in edges:
            adj[e.source].add(e.target)
            adj[e.target].add(e.source)
        reach = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            for v in adj[stack.pop()]:
                if v not in reach:
                    reach.add(v)
                    stack.append(v)
        if len(reach) != len(nodes):
            raise WeylError("shift graph on C_min is disconnected")
    return nodes, edges


def shift_path(c: TwistedClass, w: WeylElement, w_prime: WeylElement) -> list[ShiftStep]:
    """A shortest path of elementary moves from w to w' inside C_min."""
    nodes, edges = min_length_set(c)
    if w not in nodes or w_prime not in nodes:
        raise WeylError("both endpoints must lie in C_min")
    steps: dict[WeylElement, list[ShiftStep]] = {v: [] for v in nodes}
    # forward traversals first, so ties between shortest paths prefer them
    for e in edges:
        steps[e.source].append(ShiftStep(e.source, e.target, e.x, e.y, True))
    for e in edges:
        steps[e.target].append(ShiftStep(e.target, e.source, e.x, e.y, False))
    prev: dict[WeylElement, ShiftStep | None] = {w: None}
    queue = deque([w])
    while queue:
        v = queue.popleft()
        if v == w_prime:
            break
        for st in steps[v]:
            if st.end not in prev:
                prev[st.end] = st
                queue.append(st.end)
    if w_prime not in prev:
        raise WeylError("no shift path between the given elements")
    path = []
    v = w_prime
    while prev[v] is not None:
        st = prev[v]
        path.append(st)
        v = st.start
    return path[::-1]
