"""Positive braid monoid: left-greedy normal forms, good decompositions, braid-move paths."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .rootdata import DatumAutomorphism, RootDatum
from .weyl import TwistedClass, WeylElement, format_word, order_e, weyl_group

__all__ = [
    "BraidWord",
    "GarsideNormalForm",
    "BraidMove",
    "BraidError",
    "braid_lift",
    "normal_form",
    "good_decomposition",
    "find_good_element",
    "braid_move_path",
    "apply_move",
    "refine",
]

STATE_CEILING = 10**6


class BraidError(ValueError):
    pass


@dataclass(frozen=True)
class BraidWord:
    datum: RootDatum
    letters: tuple[int, ...]

    def __post_init__(self):
        for i in self.letters:
            if not 0 <= i < self.datum.rank:
                raise BraidError(f"letter {i + 1} not in I")

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        return BraidWord(self.datum, self.letters + other.letters)

    def __len__(self) -> int:
        return len(self.letters)


@dataclass(frozen=True)
class GarsideNormalForm:
    factors: tuple[WeylElement, ...]

    @property
    def letters(self) -> tuple[int, ...]:
        return tuple(i for f in self.factors for i in f.word)


@dataclass(frozen=True)
class BraidMove:
    """Replace the block (i, j, i, ...) of length m_ij starting at ``position`` by (j, i, j, ...)."""

    position: int   # 0-based
    i: int
    j: int

    def to_json(self) -> dict:
        return {"position": self.position + 1, "i": self.i + 1, "j": self.j + 1}


def braid_lift(w: WeylElement) -> BraidWord:
    return BraidWord(w.datum, w.word)


def normal_form(b: BraidWord | Sequence[int], datum: RootDatum | None = None) -> GarsideNormalForm:
    """Left-greedy normal form of a positive braid word."""
    if not isinstance(b, BraidWord):
        b = BraidWord(datum, tuple(b))
    W = weyl_group(b.datum)
    s = [W.s(i) for i in range(b.datum.rank)]
    factors = [s[i] for i in b.letters]
    changed = True
    while changed:
        changed = False
        for k in range(len(factors) - 1):
            a, c = factors[k], factors[k + 1]
            if c.is_identity():
                continue
            for i in sorted(W.left_descents(c) - W.right_descents(a)):
                factors[k] = a * s[i]
                factors[k + 1] = s[i] * c
                changed = True
                break
    return GarsideNormalForm(tuple(f for f in factors if not f.is_identity()))


def good_decomposition(w: WeylElement, delta: DatumAutomorphism):
    """``(e, y_*)`` if the normal form of ŵ δ(ŵ) ... δ^{e-1}(ŵ) starts with w_I, else ``None``."""
    e = order_e(w, delta)
    letters: tuple[int, ...] = ()
    for j in range(e):
        p = delta.power(j)
        letters += tuple(p[i] for i in w.word)
    nf = normal_form(BraidWord(w.datum, letters))
    if not nf.factors or nf.factors[0] != weyl_group(w.datum).longest:
        return None
    return e, nf.factors


def find_good_element(c: TwistedClass) -> WeylElement:
    if not c.elliptic:
        raise BraidError("class is not elliptic")
    for w in c.min_length_elements:
        if good_decomposition(w, c.delta) is not None:
            return w
    raise BraidError("no good element in C_min (consistency failure)")


def _blocks(datum: RootDatum, i: int, j: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    m = datum.m(i, j)
    a = tuple(i if k % 2 == 0 else j for k in range(m))
    b = tuple(j if k % 2 == 0 else i for k in range(m))
    return a, b


def apply_move(datum: RootDatum, letters: tuple[int, ...], move: BraidMove) -> tuple[int, ...]:
    a, b = _blocks(datum, move.i, move.j)
    p = move.position
    if letters[p:p + len(a)] != a:
        raise BraidError(f"move {move} does not apply to {format_word(letters)}")
    return letters[:p] + b + letters[p + len(a):]


def _neighbours(datum: RootDatum, letters: tuple[int, ...]):
    r = datum.rank
    for p in range(len(letters)):
        i = letters[p]
        for j in range(r):
            if j == i:
                continue
            a, b = _blocks(datum, i, j)
            if letters[p:p + len(a)] == a:
                yield BraidMove(p, i, j), letters[:p] + b + letters[p + len(a):]


def braid_move_path(datum: RootDatum, source: Sequence[int], target: Sequence[int],
                    ceiling: int | None = None) -> list[BraidMove]:
    """Lexicographically least shortest sequence of braid moves from ``source`` to ``target``.

    Both arguments are letter strings (refine sequences of Weyl elements with
    :func:`refine` first).
    """
    return list(_path(datum, tuple(source), tuple(target),
                      STATE_CEILING if ceiling is None else ceiling))


def refine(elements: Sequence[WeylElement]) -> tuple[int, ...]:
    return tuple(i for w in elements for i in w.word)


@lru_cache(maxsize=256)
def _path(datum: RootDatum, source: tuple[int, ...], target: tuple[int, ...],
          ceiling: int) -> tuple[BraidMove, ...]:
    if len(source) != len(target):
        raise BraidError("braid classes differ (lengths)")
    if source == target:
        return ()
    if normal_form(BraidWord(datum, source)) != normal_form(BraidWord(datum, target)):
        raise BraidError("braid classes differ")
    # BFS from the source; neighbours are visited in move order, which gives the
    # lexicographically least path among shortest ones
    prev: dict[tuple[int, ...], tuple[tuple[int, ...], BraidMove] | None] = {source: None}
    queue = deque([source])
    while queue:
        cur = queue.popleft()
        for mv, nxt in _neighbours(datum, cur):
            if nxt in prev:
                continue
            prev[nxt] = (cur, mv)
            if nxt == target:
                moves = []
                node = nxt
                while prev[node] is not None:
                    node, m = prev[node]
                    moves.append(m)
                return tuple(reversed(moves))
            if len(prev) > ceiling:
                raise BraidError("braid-move search exceeded the state ceiling")
            queue.append(nxt)
    raise BraidError("no braid-move path found")  # pragma: no cover
