"""Exact commutative rings: Z, Q, Z/m, F_q and Z[X1..XN].

Values carry raw *payloads* in canonical form:

* ``Z``      python ``int``
* ``Q``      ``fractions.Fraction``
* ``Zmod``   ``int`` in ``[0, m)``
* ``Fq``     ``int`` code; for q = p^k the base-p digits of the code are the
  coefficients (low degree first) of a polynomial over F_p modulo the fixed
  irreducible ``f``
* ``PolyZ``  :class:`Poly`

Descriptors expose arithmetic on payloads directly; :class:`RingValue` is a thin
typed wrapper for users.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from itertools import product
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "Poly",
    "RingDescriptor",
    "RingValue",
    "RingMap",
    "RingError",
    "make_ring",
    "enumerate_ring",
    "apply_ring_map",
    "reduction",
    "inclusion",
    "frobenius",
    "identity_map",
    "evaluation",
    "is_prime",
    "CONWAY",
]

DEFAULT_MONOMIAL_CEILING = 10**6


class RingError(ValueError):
    """Raised for malformed ring specifications or invalid ring operations."""


# ---------------------------------------------------------------------------
# sparse multivariate integer polynomials


def _grlex_key(exps: tuple[int, ...]) -> tuple:
    return (sum(exps), exps)


class Poly:
    """Polynomial over Z in a fixed number of variables.

    Stored as a mapping from exponent tuples to nonzero integer coefficients.
    Instances are immutable and hashable.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], int] | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for e, c in terms.items():
                if c:
                    if len(e) != nvars:
                        raise RingError("exponent length does not match variable count")
                    clean[tuple(e)] = int(c)
        self._terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, nvars: int, c: int) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1})

    @property
    def terms(self) -> dict[tuple[int, ...], int]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_value(self) -> int | None:
        """The integer value if this is a constant polynomial, else ``None``."""
        if not self._terms:
            return 0
        if len(self._terms) == 1 and (0,) * self.nvars in self._terms:
            return self._terms[(0,) * self.nvars]
        return None

    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=-1)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = Poly.const(self.nvars, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise RingError("polynomials in different variable counts")
            return other
        return Poly.const(self.nvars, int(other))

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        t = dict(self._terms)
        for e, c in other._terms.items():
            t[e] = t.get(e, 0) + c
        return Poly(self.nvars, t)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        other = self._coerce(other)
        t: dict[tuple[int, ...], int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        out = Poly(self.nvars, t)
        if len(out) > DEFAULT_MONOMIAL_CEILING:
            raise RingError(f"monomial ceiling exceeded ({len(out)} terms)")
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise RingError("negative power of a polynomial")
        out = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def evaluate(self, point: Sequence[Any], add: Callable, mul: Callable, zero: Any, one: Any,
                 from_int: Callable[[int], Any]) -> Any:
        """Evaluate with caller-supplied ring operations (payload level)."""
        acc = zero
        powers: dict[tuple[int, int], Any] = {}

        def pw(i: int, k: int):
            if k == 0:
                return one
            key = (i, k)
            if key not in powers:
                powers[key] = mul(pw(i, k - 1), point[i])
            return powers[key]

        for e, c in self._terms.items():
            term = from_int(c)
            for i, k in enumerate(e):
                if k:
                    term = mul(term, pw(i, k))
            acc = add(acc, term)
        return acc

    def substitute(self, images: Sequence["Poly"], ceiling: int | None = None) -> "Poly":
        """Replace ``X_i`` by ``images[i]`` (all images share one variable count)."""
        if ceiling is None:
            ceiling = DEFAULT_MONOMIAL_CEILING
        if len(images) != self.nvars:
            raise RingError("substitution arity mismatch")
        m = images[0].nvars if images else 0
        cache: dict[tuple[int, int], Poly] = {}

        def pw(i: int, k: int) -> Poly:
            if k == 0:
                return Poly.const(m, 1)
            if (i, k) not in cache:
                cache[(i, k)] = pw(i, k - 1) * images[i]
            return cache[(i, k)]

        acc: dict[tuple[int, ...], int] = {}
        for e, c in self._terms.items():
            term = Poly.const(m, c)
            for i, k in enumerate(e):
                if k:
                    term = term * pw(i, k)
            for te, tc in term._terms.items():
                acc[te] = acc.get(te, 0) + tc
            if len(acc) > ceiling:
                raise RingError(f"monomial ceiling exceeded ({len(acc)} terms)")
        return Poly(m, acc)

    def derivative(self, i: int) -> "Poly":
        t = {}
        for e, c in self._terms.items():
            if e[i]:
                f = list(e)
                f[i] -= 1
                t[tuple(f)] = c * e[i]
        return Poly(self.nvars, t)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms in descending graded-lex order."""
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def format(self, names: Sequence[str]) -> str:
        if not self._terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(e) if k
            )
            a = abs(c)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            sign = "-" if c < 0 else "+"
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"Poly({self.format([f'X{i + 1}' for i in range(self.nvars)])})"

    @classmethod
    def parse(cls, text: str, names: Sequence[str]) -> "Poly":
        """Parse sums of ``c*X1^2*X2`` style monomials."""
        index = {n: i for i, n in enumerate(names)}
        nv = len(names)
        s = text.replace(" ", "")
        if not s:
            raise RingError("empty polynomial")
        terms: dict[tuple[int, ...], int] = {}
        for sign, body in re.findall(r"([+-]?)([^+-]+)", s):
            if not body:
                raise RingError(f"malformed polynomial {text!r}")
            coef = -1 if sign == "-" else 1
            exps = [0] * nv
            for factor in body.split("*"):
                if not factor:
                    raise RingError(f"malformed polynomial {text!r}")
                if factor.isdigit():
                    coef *= int(factor)
                    continue
                name, _, k = factor.partition("^")
                if name not in index or (k and not k.isdigit()):
                    raise RingError(f"unknown factor {factor!r}")
                exps[index[name]] += int(k) if k else 1
            e = tuple(exps)
            terms[e] = terms.get(e, 0) + coef
        # check that the text really was consumed
        if re.sub(r"([+-]?)([^+-]+)", "", s):
            raise RingError(f"malformed polynomial {text!r}")
        return cls(nv, terms)


# ---------------------------------------------------------------------------
# prime fields and extension fields


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _prime_power(q: int) -> tuple[int, int] | None:
    for p in range(2, q + 1):
        if q % p == 0:
            k = 0
            while q % p == 0:
                q //= p
                k += 1
            return (p, k) if q == 1 and is_prime(p) else None
    return None


# Conway polynomials, coefficients low degree first (monic).
CONWAY: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 2): (2, 4, 1),
    (7, 2): (3, 6, 1),
}


def _polymod_p(a: list[int], f: Sequence[int], p: int) -> list[int]:
    a = [c % p for c in a]
    k = len(f) - 1
    while len(a) > k:
        c = a.pop()
        if c:
            for i in range(k):
                a[len(a) - k + i] = (a[len(a) - k + i] - c * f[i]) % p
    return a


def _is_irreducible(f: Sequence[int], p: int) -> bool:
    """Irreducibility over F_p by trial division with all monic polynomials of degree <= k/2."""
    k = len(f) - 1
    for d in range(1, k // 2 + 1):
        for low in product(range(p), repeat=d):
            g = list(low) + [1]
            if not any(_polymod_p(list(f), g, p)):
                return False
    return True


def _least_irreducible(p: int, k: int) -> tuple[int, ...]:
    # lexicographic on the coefficient vector read from the top (x^{k-1}) down
    for high_first in product(range(p), repeat=k):
        f = tuple(reversed(high_first)) + (1,)
        if f[0] and _is_irreducible(f, p):
            return f
    raise RingError(f"no irreducible polynomial of degree {k} over F_{p}")


# ---------------------------------------------------------------------------
# descriptors


class RingDescriptor:
    """Description of a commutative ring with 1 plus payload-level arithmetic.

    Use :func:`make_ring` rather than the constructor; descriptors are cached so
    equal specs yield the same object.
    """

    KINDS = ("Integers", "IntegersMod", "FiniteField", "Rationals", "PolynomialsOverZ")

    def __init__(self, kind: str, modulus: int = 0, degree: int = 1,
                 irreducible: tuple[int, ...] | None = None,
                 variables: tuple[str, ...] = ()):
        if kind not in self.KINDS:
            raise RingError(f"unknown ring kind {kind!r}")
        self.kind = kind
        self.modulus = modulus          # m for Z/m, p for F_q
        self.degree = degree            # k for F_{p^k}
        self.irreducible = irreducible  # modulus polynomial for k > 1
        self.variables = variables
        self._key = (kind, modulus, degree, irreducible, variables)

    # identity ---------------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        return isinstance(other, RingDescriptor) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    @property
    def spec(self) -> str:
        if self.kind == "Integers":
            return "Z"
        if self.kind == "Rationals":
            return "Q"
        if self.kind == "IntegersMod":
            return f"Zmod:{self.modulus}"
        if self.kind == "FiniteField":
            return f"Fq:{self.modulus ** self.degree}"
        return "PolyZ:" + ",".join(self.variables)

    def __repr__(self) -> str:
        return f"RingDescriptor({self.spec!r})"

    # shape ------------------------------------------------------------------
    @property
    def is_finite(self) -> bool:
        return self.kind in ("IntegersMod", "FiniteField")

    @property
    def is_field(self) -> bool:
        return self.kind in ("FiniteField", "Rationals")

    @property
    def size(self) -> int:
        if self.kind == "IntegersMod":
            return self.modulus
        if self.kind == "FiniteField":
            return self.modulus ** self.degree
        raise RingError(f"{self.spec} is infinite")

    @property
    def characteristic(self) -> int:
        if self.kind in ("IntegersMod", "FiniteField"):
            return self.modulus
        return 0

    @property
    def is_residue(self) -> bool:
        """True when payloads are plain residues mod ``modulus`` (Z/m or prime fields)."""
        return self.kind == "IntegersMod" or (self.kind == "FiniteField" and self.degree == 1)

    # tables for F_{p^k}, k > 1 ---------------------------------------------
    def _digits(self, c: int) -> list[int]:
        p = self.modulus
        out = []
        for _ in range(self.degree):
            out.append(c % p)
            c //= p
        return out

    def _code(self, digits: Sequence[int]) -> int:
        p = self.modulus
        return sum(d * p**i for i, d in enumerate(digits))

    def _slow_mul(self, a: int, b: int) -> int:
        p = self.modulus
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.degree - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] += x * y
        return self._code(_polymod_p(prod, self.irreducible, p))

    @cached_property
    def add_table(self) -> np.ndarray:
        q, p = self.size, self.modulus
        digits = np.array([self._digits(c) for c in range(q)], dtype=np.int64)
        weights = p ** np.arange(self.degree, dtype=np.int64)
        s = (digits[:, None, :] + digits[None, :, :]) % p
        return (s * weights).sum(axis=2)

    @cached_property
    def mul_table(self) -> np.ndarray:
        q = self.size
        t = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                t[a, b] = t[b, a] = self._slow_mul(a, b)
        return t

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([self._code([(-d) % self.modulus for d in self._digits(c)])
                         for c in range(self.size)], dtype=np.int64)

    @cached_property
    def inv_table(self) -> np.ndarray:
        t = np.zeros(self.size, dtype=np.int64)
        mt = self.mul_table
        for a in range(1, self.size):
            t[a] = int(np.nonzero(mt[a] == 1)[0][0])
        return t

    # payload arithmetic -------------------------------------------------------
    def zero(self):
        if self.kind == "PolynomialsOverZ":
            return Poly(len(self.variables))
        if self.kind == "Rationals":
            return Fraction(0)
        return 0

    def one(self):
        return self.from_int(1)

    def from_int(self, n: int):
        k = self.kind
        if k == "Integers":
            return int(n)
        if k == "Rationals":
            return Fraction(n)
        if k == "PolynomialsOverZ":
            return Poly.const(len(self.variables), n)
        if self.is_residue:
            return n % self.modulus
        # F_{p^k}: integers land in the prime subfield, code = residue
        return n % self.modulus

    def add(self, a, b):
        if self.is_residue:
            return (a + b) % self.modulus
        if self.kind == "FiniteField":
            return int(self.add_table[a, b])
        return a + b

    def neg(self, a):
        if self.is_residue:
            return (-a) % self.modulus
        if self.kind == "FiniteField":
            return int(self.neg_table[a])
        return -a

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.is_residue:
            return (a * b) % self.modulus
        if self.kind == "FiniteField":
            return int(self.mul_table[a, b])
        return a * b

    def pow(self, a, n: int):
        if n < 0:
            return self.pow(self.inv(a), -n)
        out = self.one()
        base = a
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def is_unit(self, a) -> bool:
        k = self.kind
        if k == "Integers":
            return a in (1, -1)
        if k == "Rationals":
            return a != 0
        if k == "PolynomialsOverZ":
            return a.constant_value() in (1, -1)
        if k == "IntegersMod":
            from math import gcd
            return gcd(a, self.modulus) == 1
        return a != 0

    def inv(self, a):
        if not self.is_unit(a):
            raise RingError(f"{self.format(a)} is not a unit in {self.spec}")
        k = self.kind
        if k == "Integers":
            return a
        if k == "Rationals":
            return 1 / a
        if k == "PolynomialsOverZ":
            return a
        if self.is_residue:
            return pow(a, -1, self.modulus)
        return int(self.inv_table[a])

    def equal(self, a, b) -> bool:
        return a == b

    def is_zero(self, a) -> bool:
        return a == self.zero()

    def elements(self) -> list:
        """Payloads of all elements in the canonical order (0 first, 1 second)."""
        if not self.is_finite:
            raise RingError(f"{self.spec} is infinite")
        return list(range(self.size))

    def canonical(self, a):
        """Validate and canonicalize a payload."""
        k = self.kind
        if k == "Integers":
            if isinstance(a, bool) or not isinstance(a, (int, np.integer)):
                raise RingError(f"not an integer payload: {a!r}")
            return int(a)
        if k == "Rationals":
            return Fraction(a)
        if k == "PolynomialsOverZ":
            if isinstance(a, Poly):
                if a.nvars != len(self.variables):
                    raise RingError("polynomial has the wrong number of variables")
                return a
            return Poly.const(len(self.variables), int(a))
        if self.is_residue:
            return int(a) % self.modulus
        a = int(a)
        if not 0 <= a < self.size:
            raise RingError(f"code {a} out of range for {self.spec}")
        return a

    # text -------------------------------------------------------------------
    def format(self, a) -> str:
        k = self.kind
        if k in ("Integers", "IntegersMod"):
            return str(a)
        if k == "Rationals":
            return str(a)
        if k == "PolynomialsOverZ":
            return a.format(self.variables)
        if self.degree == 1:
            return str(a)
        digits = self._digits(a)
        terms = []
        for i in reversed(range(self.degree)):
            d = digits[i]
            if not d:
                continue
            mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if not mono:
                terms.append(str(d))
            else:
                terms.append(mono if d == 1 else f"{d}*{mono}")
        return "+".join(terms) if terms else "0"

    def parse(self, text: str):
        text = text.strip()
        k = self.kind
        try:
            if k == "Integers":
                return int(text)
            if k == "Rationals":
                return Fraction(text)
            if k == "IntegersMod" or (k == "FiniteField" and self.degree == 1):
                return int(text) % self.modulus
        except ValueError as exc:
            raise RingError(f"cannot parse {text!r} in {self.spec}") from exc
        if k == "PolynomialsOverZ":
            return Poly.parse(text, self.variables)
        # F_{p^k}: polynomial in t
        digits = [0] * self.degree
        for part in text.replace(" ", "").split("+"):
            if part == "0":
                continue
            coef, _, mono = part.rpartition("*") if "*" in part else ("", "", part)
            if mono.startswith("t"):
                e = 1 if mono == "t" else int(mono[2:])
                c = int(coef) if coef else 1
            else:
                e, c = 0, int(mono)
            if e >= self.degree:
                raise RingError(f"cannot parse {text!r} in {self.spec}")
            digits[e] = (digits[e] + c) % self.modulus
        return self._code(digits)

    # Frobenius ---------------------------------------------------------------
    def frobenius_table(self, q: int) -> np.ndarray:
        if self.kind != "FiniteField":
            raise RingError("Frobenius needs a finite field")
        return np.array([self.pow(a, q) for a in range(self.size)], dtype=np.int64)

    def element(self, a) -> "RingValue":
        return RingValue(self, self.canonical(a))


_SPEC = re.compile(r"^(Z|Q|Zmod:(\d+)|Fq:(\d+)|PolyZ:(.+))$")


@lru_cache(maxsize=None)
def make_ring(spec: str) -> RingDescriptor:
    """Parse a ring spec: ``Z``, ``Q``, ``Zmod:<m>``, ``Fq:<p^k>`` or ``PolyZ:<v1,...>``.

    >>> make_ring("Fq:4").size
    4
    """
    m = _SPEC.match(spec.strip())
    if not m:
        raise RingError(f"malformed ring spec {spec!r}")
    if m.group(1) == "Z":
        return RingDescriptor("Integers")
    if m.group(1) == "Q":
        return RingDescriptor("Rationals")
    if m.group(2) is not None:
        mod = int(m.group(2))
        if mod < 2:
            raise RingError("modulus must be at least 2")
        return RingDescriptor("IntegersMod", modulus=mod)
    if m.group(3) is not None:
        q = int(m.group(3))
        pk = _prime_power(q) if q >= 2 else None
        if pk is None:
            raise RingError(f"{q} is not a prime power")
        p, k = pk
        if k == 1:
            return RingDescriptor("FiniteField", modulus=p, degree=1)
        f = CONWAY.get((p, k)) or _least_irreducible(p, k)
        return RingDescriptor("FiniteField", modulus=p, degree=k, irreducible=f)
    names = tuple(v.strip() for v in m.group(4).split(","))
    if any(not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", v) for v in names):
        raise RingError(f"bad variable names in {spec!r}")
    if len(set(names)) != len(names):
        raise RingError("polynomial variable names must be distinct")
    return RingDescriptor("PolynomialsOverZ", variables=names)


def enumerate_ring(r: RingDescriptor) -> list["RingValue"]:
    """All elements of a finite ring, 0 first and 1 second."""
    return [RingValue(r, a) for a in r.elements()]


# ---------------------------------------------------------------------------
# values


@dataclass(frozen=True)
class RingValue:
    descriptor: RingDescriptor
    payload: Any

    def _other(self, other) -> Any:
        if isinstance(other, RingValue):
            if other.descriptor != self.descriptor:
                raise RingError("values from different rings")
            return other.payload
        if isinstance(other, int):
            return self.descriptor.from_int(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return RingValue(self.descriptor, self.descriptor.add(self.payload, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return RingValue(self.descriptor, self.descriptor.sub(self.payload, o))

    def __rsub__(self, other):
        o = self._other(other)
        return RingValue(self.descriptor, self.descriptor.sub(o, self.payload))

    def __mul__(self, other):
        o = self._other(other)
        return RingValue(self.descriptor, self.descriptor.mul(self.payload, o))

    __rmul__ = __mul__

    def __neg__(self):
        return RingValue(self.descriptor, self.descriptor.neg(self.payload))

    def __pow__(self, n: int):
        return RingValue(self.descriptor, self.descriptor.pow(self.payload, n))

    def is_unit(self) -> bool:
        return self.descriptor.is_unit(self.payload)

    def inverse(self) -> "RingValue":
        return RingValue(self.descriptor, self.descriptor.inv(self.payload))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and not isinstance(other, bool):
            return self.payload == self.descriptor.from_int(other)
        if not isinstance(other, RingValue):
            return NotImplemented
        return self.descriptor == other.descriptor and self.payload == other.payload

    def __hash__(self) -> int:
        return hash((self.descriptor, self.payload))

    def __str__(self) -> str:
        return self.descriptor.format(self.payload)

    def __repr__(self) -> str:
        return f"RingValue({self.descriptor.spec}, {self})"


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class RingMap:
    """A ring homomorphism.

    ``kind`` is one of ``identity``, ``reduction``, ``inclusion``, ``frobenius``,
    ``evaluation`` or ``composite``.  For ``frobenius`` the parameter is q, for
    ``evaluation`` it is the tuple of target payloads, for ``composite`` the
    tuple of maps applied left to right.
    """

    source: RingDescriptor
    target: RingDescriptor
    kind: str
    param: Any = None
    _table: Any = field(default=None, compare=False, repr=False, hash=False)

    def apply_payload(self, a):
        k = self.kind
        if k == "identity":
            return a
        if k == "reduction":
            if self.source.kind == "PolynomialsOverZ":
                raise RingError("reduce polynomials via evaluation")
            return self.target.from_int(a)
        if k == "inclusion":
            return _include(self.source, self.target, a)
        if k == "frobenius":
            if self._table is not None:
                return int(self._table[a])
            return self.source.pow(a, self.param)
        if k == "evaluation":
            t = self.target
            return a.evaluate(self.param, t.add, t.mul, t.zero(), t.one(), t.from_int)
        if k == "composite":
            for m in self.param:
                a = m.apply_payload(a)
            return a
        raise RingError(f"unknown map kind {k!r}")

    def __call__(self, v: RingValue) -> RingValue:
        return apply_ring_map(self, v)

    def then(self, other: "RingMap") -> "RingMap":
        """The composite that applies ``self`` first and ``other`` second."""
        if other.source != self.target:
            raise RingError("maps are not composable")
        parts = (self.param if self.kind == "composite" else (self,)) + (
            other.param if other.kind == "composite" else (other,))
        return RingMap(self.source, other.target, "composite", tuple(parts))

    @property
    def is_identity(self) -> bool:
        if self.kind == "identity":
            return True
        if self.kind == "frobenius":
            return bool(np.array_equal(self._table, np.arange(self.source.size)))
        if self.source == self.target and self.source.is_finite:
            return all(self.apply_payload(a) == a for a in self.source.elements())
        return False

    def order(self) -> int:
        """Order as an automorphism (1 for the identity)."""
        if self.source != self.target:
            raise RingError("not an endomorphism")
        if not self.source.is_finite:
            if self.kind == "identity":
                return 1
            raise RingError("order only computed for finite rings")
        elems = self.source.elements()
        cur = list(elems)
        for n in range(1, self.source.size + 2):
            cur = [self.apply_payload(a) for a in cur]
            if cur == elems:
                return n
            if len(set(cur)) != len(cur):
                raise RingError("map is not an automorphism")
        raise RingError("map is not an automorphism")

    def inverse(self) -> "RingMap":
        n = self.order()
        if n == 1:
            return identity_map(self.source)
        if self.kind == "frobenius":
            q = self.param
            inv_q = q ** (n - 1)
            return frobenius(self.source, inv_q)
        maps = (self,) * (n - 1)
        return reduce(RingMap.then, maps)

    def describe(self) -> str:
        if self.kind == "frobenius":
            return f"frob:{self.param}"
        if self.kind == "identity":
            return "id"
        return self.kind


def _include(src: RingDescriptor, tgt: RingDescriptor, a):
    if src.kind == "Integers":
        return tgt.from_int(a)
    if src.kind == "FiniteField" and tgt.kind == "FiniteField" and src.modulus == tgt.modulus:
        if src.degree == 1:
            return a
        raise RingError("only prime-field inclusions are tabulated")
    raise RingError(f"no inclusion {src.spec} -> {tgt.spec}")


def apply_ring_map(m: RingMap, v: RingValue) -> RingValue:
    if v.descriptor != m.source:
        raise RingError(f"value in {v.descriptor.spec}, map source is {m.source.spec}")
    return RingValue(m.target, m.apply_payload(v.payload))


def identity_map(r: RingDescriptor) -> RingMap:
    return RingMap(r, r, "identity")


def reduction(source: RingDescriptor, target: RingDescriptor) -> RingMap:
    if source.kind != "Integers" or target.kind not in ("IntegersMod", "FiniteField"):
        raise RingError("reduction goes from Z to Z/m or F_q")
    return RingMap(source, target, "reduction")


def inclusion(source: RingDescriptor, target: RingDescriptor) -> RingMap:
    ok = (source.kind == "Integers" and target.kind in ("Rationals", "PolynomialsOverZ")) or (
        source.kind == "FiniteField" and target.kind == "FiniteField"
        and source.degree == 1 and source.modulus == target.modulus)
    if not ok:
        raise RingError(f"no inclusion {source.spec} -> {target.spec}")
    return RingMap(source, target, "inclusion")


def frobenius(r: RingDescriptor, q: int) -> RingMap:
    """x -> x^q on a finite field; q must be a power of the characteristic."""
    if r.kind != "FiniteField":
        raise RingError("Frobenius needs a finite field")
    p = r.modulus
    t = q
    while t % p == 0 and t > 1:
        t //= p
    if t != 1:
        raise RingError(f"{q} is not a power of the characteristic {p}")
    return RingMap(r, r, "frobenius", q, r.frobenius_table(q))


def evaluation(source: RingDescriptor, target: RingDescriptor,
               point: Sequence[RingValue] | Mapping[str, RingValue]) -> RingMap:
    if source.kind != "PolynomialsOverZ":
        raise RingError("evaluation needs a polynomial ring")
    if isinstance(point, Mapping):
        point = [point[v] for v in source.variables]
    if len(point) != len(source.variables):
        raise RingError("evaluation point has the wrong length")
    payloads = tuple(target.canonical(p.payload if isinstance(p, RingValue) else p) for p in point)
    return RingMap(source, target, "evaluation", payloads)


def exhaustive_ring_axioms(r: RingDescriptor) -> bool:
    """Check associativity, commutativity and distributivity on all triples."""
    els = r.elements()
    for a, b, c in product(els, repeat=3):
        if r.add(r.add(a, b), c) != r.add(a, r.add(b, c)):
            return False
        if r.mul(r.mul(a, b), c) != r.mul(a, r.mul(b, c)):
            return False
        if r.mul(a, r.add(b, c)) != r.add(r.mul(a, b), r.mul(a, c)):
            return False
    for a, b in product(els, repeat=2):
        if r.add(a, b) != r.add(b, a) or r.mul(a, b) != r.mul(b, a):
            return False
    return True


def is_homomorphism(m: RingMap, points: Iterable | None = None) -> bool:
    """Check m(a+b)=m(a)+m(b), m(ab)=m(a)m(b), m(1)=1 on a finite source."""
    s, t = m.source, m.target
    els = list(points) if points is not None else s.elements()
    if m.apply_payload(s.one()) != t.one():
        return False
    for a, b in product(els, repeat=2):
        fa, fb = m.apply_payload(a), m.apply_payload(b)
        if m.apply_payload(s.add(a, b)) != t.add(fa, fb):
            return False
        if m.apply_payload(s.mul(a, b)) != t.mul(fa, fb):
            return False
    return True


def iter_points(r: RingDescriptor, n: int) -> Iterator[tuple]:
    """All n-tuples of payloads of a finite ring, in lexicographic order."""
    return product(r.elements(), repeat=n)
