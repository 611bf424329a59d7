"""Square matrices over the rings of :mod:`steinberg.rings`.

Three backends share one interface:

* :class:`ResidueBackend` for Z/m and F_p, numpy int64 reduced mod m
* :class:`TableBackend` for F_{p^k}, numpy arrays of element codes with
  lookup-table arithmetic
* :class:`ObjectBackend` for Z, Q and Z[X], numpy object arrays
"""

from __future__ import annotations

from typing import Any, Callable, Sequence

import numpy as np

from .rings import RingDescriptor, RingError

__all__ = ["MatrixBackend", "backend_for"]


class MatrixBackend:
    ring: RingDescriptor

    # construction
    def from_int(self, m: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def from_payloads(self, rows: Sequence[Sequence[Any]]) -> np.ndarray:
        raise NotImplementedError

    def identity(self, n: int) -> np.ndarray:
        return self.from_int(np.eye(n, dtype=np.int64))

    def zeros(self, n: int) -> np.ndarray:
        return self.from_int(np.zeros((n, n), dtype=np.int64))

    # arithmetic
    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def scale(self, c: Any, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def map_entries(self, a: np.ndarray, f: Callable[[Any], Any]) -> np.ndarray:
        return self.from_payloads([[f(x) for x in row] for row in self.to_payloads(a)])

    def to_payloads(self, a: np.ndarray) -> list[list[Any]]:
        return [[self.entry(a, i, j) for j in range(a.shape[1])] for i in range(a.shape[0])]

    def entry(self, a: np.ndarray, i: int, j: int) -> Any:
        raise NotImplementedError

    def key(self, a: np.ndarray):
        raise NotImplementedError

    def equal(self, a: np.ndarray, b: np.ndarray) -> bool:
        return self.key(a) == self.key(b)

    def transpose(self, a: np.ndarray) -> np.ndarray:
        return a.T.copy()

    def poly_in(self, h: Any, powers: Sequence[np.ndarray]) -> np.ndarray:
        """sum_k h^k D_k for integer matrices D_k."""
        r = self.ring
        acc = self.from_int(powers[0])
        hk = r.one()
        for d in powers[1:]:
            hk = r.mul(hk, h)
            acc = self.add(acc, self.scale(hk, self.from_int(d)))
        return acc

    def is_identity(self, a: np.ndarray) -> bool:
        return self.equal(a, self.identity(a.shape[0]))


class ResidueBackend(MatrixBackend):
    def __init__(self, ring: RingDescriptor):
        self.ring = ring
        self.m = ring.modulus
        self._dtype = np.uint8 if self.m <= 256 else np.int64

    def from_int(self, m):
        return np.asarray(m, dtype=np.int64) % self.m

    def from_payloads(self, rows):
        return np.array(rows, dtype=np.int64) % self.m

    def mul(self, a, b):
        return (a @ b) % self.m

    def add(self, a, b):
        return (a + b) % self.m

    def scale(self, c, a):
        return (int(c) * a) % self.m

    def map_entries(self, a, f):
        table = np.array([f(x) for x in range(self.m)], dtype=np.int64)
        return table[a]

    def entry(self, a, i, j):
        return int(a[i, j])

    def key(self, a):
        return a.astype(self._dtype).tobytes()


class TableBackend(MatrixBackend):
    def __init__(self, ring: RingDescriptor):
        self.ring = ring
        self.q = ring.size
        self.add_t = ring.add_table
        self.mul_t = ring.mul_table
        self.neg_t = ring.neg_table
        self._xor = ring.modulus == 2
        self._dtype = np.uint8 if self.q <= 256 else np.int64

    def from_int(self, m):
        # integers map into the prime subfield, whose codes are the residues
        return np.asarray(m, dtype=np.int64) % self.ring.modulus

    def from_payloads(self, rows):
        return np.array(rows, dtype=np.int64)

    def mul(self, a, b):
        prods = self.mul_t[a[:, :, None], b[None, :, :]]
        if self._xor:
            return np.bitwise_xor.reduce(prods, axis=1)
        acc = prods[:, 0, :]
        for k in range(1, prods.shape[1]):
            acc = self.add_t[acc, prods[:, k, :]]
        return acc

    def add(self, a, b):
        return self.add_t[a, b]

    def scale(self, c, a):
        return self.mul_t[int(c)][a]

    def map_entries(self, a, f):
        table = np.array([f(x) for x in range(self.q)], dtype=np.int64)
        return table[a]

    def entry(self, a, i, j):
        return int(a[i, j])

    def key(self, a):
        return a.astype(self._dtype).tobytes()


class ObjectBackend(MatrixBackend):
    def __init__(self, ring: RingDescriptor):
        self.ring = ring
        self._zero = ring.zero()

    def from_int(self, m):
        m = np.asarray(m)
        out = np.empty(m.shape, dtype=object)
        for idx, v in np.ndenumerate(m):
            out[idx] = self.ring.from_int(int(v))
        return out

    def from_payloads(self, rows):
        n, k = len(rows), len(rows[0])
        out = np.empty((n, k), dtype=object)
        for i in range(n):
            for j in range(k):
                out[i, j] = self.ring.canonical(rows[i][j])
        return out

    def mul(self, a, b):
        r = self.ring
        n, k, m = a.shape[0], a.shape[1], b.shape[1]
        out = np.empty((n, m), dtype=object)
        zero = self._zero
        # skip zero entries; matrices here are sparse-ish
        b_nz = [[(t, b[t, j]) for t in range(k) if b[t, j] != zero] for j in range(m)]
        for i in range(n):
            row = a[i]
            for j in range(m):
                acc = zero
                for t, bv in b_nz[j]:
                    av = row[t]
                    if av != zero:
                        acc = r.add(acc, r.mul(av, bv))
                out[i, j] = acc
        return out

    def add(self, a, b):
        r = self.ring
        out = np.empty(a.shape, dtype=object)
        for idx in np.ndindex(a.shape):
            out[idx] = r.add(a[idx], b[idx])
        return out

    def scale(self, c, a):
        r = self.ring
        out = np.empty(a.shape, dtype=object)
        for idx in np.ndindex(a.shape):
            out[idx] = r.mul(c, a[idx])
        return out

    def map_entries(self, a, f):
        out = np.empty(a.shape, dtype=object)
        for idx in np.ndindex(a.shape):
            out[idx] = f(a[idx])
        return out

    def entry(self, a, i, j):
        return a[i, j]

    def key(self, a):
        return tuple(a.ravel().tolist())


def backend_for(ring: RingDescriptor) -> MatrixBackend:
    if ring.is_residue:
        if ring.modulus > 2**24:
            return ObjectBackend(ring)
        return ResidueBackend(ring)
    if ring.kind == "FiniteField":
        if ring.size > 4096:
            raise RingError("extension fields above 4096 elements are not supported for matrices")
        return TableBackend(ring)
    return ObjectBackend(ring)
