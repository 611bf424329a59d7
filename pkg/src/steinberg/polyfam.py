"""Integer polynomial self-maps of affine N-space.

A :class:`PolyMap` is a tuple of N polynomials in X1..XN.  Composition follows
function order: ``compose_polymap(f, g)`` is ``f o g``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .rings import Poly, RingDescriptor, RingError, RingMap, make_ring

__all__ = [
    "PolyMap",
    "compose_polymap",
    "is_identity",
    "verify_two_sided_inverse",
    "jacobian_det",
    "variables",
]


def variables(n: int) -> tuple[str, ...]:
    return tuple(f"X{i + 1}" for i in range(n))


@dataclass(frozen=True)
class PolyMap:
    n_vars: int
    components: tuple[Poly, ...]

    def __post_init__(self):
        if self.n_vars < 1:
            raise RingError("a polynomial map needs at least one variable")
        if len(self.components) != self.n_vars:
            raise RingError("component count must equal the number of variables")
        for c in self.components:
            if c.nvars != self.n_vars:
                raise RingError("component lives in the wrong polynomial ring")

    @classmethod
    def identity(cls, n: int) -> "PolyMap":
        return cls(n, tuple(Poly.var(n, i) for i in range(n)))

    @classmethod
    def parse(cls, texts: Sequence[str]) -> "PolyMap":
        names = variables(len(texts))
        return cls(len(texts), tuple(Poly.parse(t, names) for t in texts))

    @property
    def ring(self) -> RingDescriptor:
        return make_ring("PolyZ:" + ",".join(variables(self.n_vars)))

    def format(self) -> list[str]:
        names = variables(self.n_vars)
        return [c.format(names) for c in self.components]

    def evaluate(self, ring: RingDescriptor, point: Sequence) -> tuple:
        """Evaluate at a point of ``ring``^N given as payloads."""
        return tuple(
            c.evaluate(point, ring.add, ring.mul, ring.zero(), ring.one(), ring.from_int)
            for c in self.components
        )

    def is_bijective_on(self, ring: RingDescriptor) -> bool:
        """Exhaustive bijectivity test on a finite ring."""
        seen = set()
        for pt in product(ring.elements(), repeat=self.n_vars):
            img = self.evaluate(ring, pt)
            if img in seen:
                return False
            seen.add(img)
        return len(seen) == ring.size ** self.n_vars

    def natural_under(self, m: RingMap, point: Sequence) -> bool:
        """m(f(a)) == f(m(a)) for one point ``a`` of the source ring."""
        lhs = tuple(m.apply_payload(v) for v in self.evaluate(m.source, point))
        rhs = self.evaluate(m.target, [m.apply_payload(a) for a in point])
        return lhs == rhs


def compose_polymap(f: PolyMap, g: PolyMap, ceiling: int | None = None) -> PolyMap:
    """``f o g``: component i is ``f_i(g_1, ..., g_N)``."""
    if f.n_vars != g.n_vars:
        raise RingError("arity mismatch")
    return PolyMap(f.n_vars, tuple(c.substitute(g.components, ceiling) for c in f.components))


def is_identity(f: PolyMap) -> bool:
    return all(c == Poly.var(f.n_vars, i) for i, c in enumerate(f.components))


def verify_two_sided_inverse(f: PolyMap, f_prime: PolyMap) -> bool:
    if f.n_vars != f_prime.n_vars:
        raise RingError("arity mismatch")
    return is_identity(compose_polymap(f_prime, f)) and is_identity(compose_polymap(f, f_prime))


def _det(rows: list[list[Poly]]) -> Poly:
    # cofactor expansion along the first row; N is small here
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = Poly(rows[0][0].nvars)
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det(minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def jacobian_det(f: PolyMap) -> Poly:
    rows = [[c.derivative(k) for k in range(f.n_vars)] for c in f.components]
    return _det(rows)
