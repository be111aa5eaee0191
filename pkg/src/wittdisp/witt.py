"""Truncated p-typical Witt vectors over the rings of :mod:`wittdisp.rings`.

Structure polynomials are obtained from the ghost recursion

    gh_n(X) = sum_{j<=n} p^j X_j^(p^(n-j))

by exact integer division and cached per prime.  Polynomials are stored sparsely:
a monomial is a sorted tuple of (variable, exponent) pairs, where variable 2j is
X_j and 2j+1 is Y_j.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from functools import lru_cache

from .errors import ArgumentError, DomainError, ResourceError
from .rings import Ring, require_prime

MAX_LENGTH = 5
MAX_PRIME = 7
MAX_TERMS = 400_000
CACHE_ENV = "WITTDISP_CACHE_DIR"


# -- sparse integer polynomials ------------------------------------------------

def _mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _padd(a, b, sign=1):
    out = dict(a)
    for m, c in b.items():
        val = out.get(m, 0) + sign * c
        if val:
            out[m] = val
        else:
            out.pop(m, None)
    return out


def _pmul(a, b):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _mono_mul(ma, mb)
            val = out.get(m, 0) + ca * cb
            if val:
                out[m] = val
            else:
                del out[m]
    if len(out) > MAX_TERMS:
        raise ResourceError("structure polynomial exceeds the term cap")
    return out


def _ppow(a, e):
    result = {(): 1}
    base = a
    while e:
        if e & 1:
            result = _pmul(result, base)
        e >>= 1
        if e:
            base = _pmul(base, base)
    return result


def _pvar(v):
    return {((v, 1),): 1}


def _ghost_poly(p, n, var):
    out = {}
    for j in range(n + 1):
        out = _padd(out, {m: c * p ** j for m, c in _ppow(_pvar(var(j)), p ** (n - j)).items()})
    return out


def _solve_next(p, n, target, previous):
    rest = dict(target)
    for j, poly in enumerate(previous):
        rest = _padd(rest, {m: c * p ** j for m, c in _ppow(poly, p ** (n - j)).items()}, -1)
    q = p ** n
    out = {}
    for m, c in rest.items():
        if c % q:
            raise ArithmeticError("ghost recursion produced an inexact division")
        out[m] = c // q
    return out


def _X(j):
    return 2 * j


def _Y(j):
    return 2 * j + 1


class _Store:
    """Write-once per-prime cache, optionally mirrored to a directory."""

    def __init__(self):
        self.lock = threading.Lock()
        self.data = {}

    def _path(self, p, kind, n):
        root = os.environ.get(CACHE_ENV)
        if not root:
            return None
        return os.path.join(root, f"witt_p{p}_{kind}_{n}.json")

    def _load(self, p, kind, n):
        path = self._path(p, kind, n)
        if path and os.path.exists(path):
            with open(path) as fh:
                raw = json.load(fh)
            return {tuple(tuple(x) for x in m): c for m, c in raw}
        return None

    def _save(self, p, kind, n, poly):
        path = self._path(p, kind, n)
        if not path:
            return
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = f"{path}.{os.getpid()}.{threading.get_ident()}.tmp"
        with open(tmp, "w") as fh:
            json.dump(sorted([list(map(list, m)), c] for m, c in poly.items()), fh)
        os.replace(tmp, path)

    def get(self, p, kind, n, build):
        key = (p, kind)
        with self.lock:
            polys = self.data.setdefault(key, [])
            while len(polys) <= n:
                k = len(polys)
                poly = self._load(p, kind, k)
                if poly is None:
                    poly = build(k, polys)
                    self._save(p, kind, k, poly)
                polys.append(poly)
            return polys[n]


_STORE = _Store()


def _builder(p, kind):
    def build(n, previous):
        if kind == "sum":
            target = _padd(_ghost_poly(p, n, _X), _ghost_poly(p, n, _Y))
        elif kind == "prod":
            target = _pmul(_ghost_poly(p, n, _X), _ghost_poly(p, n, _Y))
        elif kind == "neg":
            target = {m: -c for m, c in _ghost_poly(p, n, _X).items()}
        elif kind == "frob":
            target = _ghost_poly(p, n + 1, _X)
        else:
            raise ArgumentError(kind)
        return _solve_next(p, n, target, previous)
    return build


def _check_bounds(p, m, max_length=None, max_prime=None):
    require_prime(p)
    if m < 1:
        raise ArgumentError("length must be at least 1")
    if m > (max_length or MAX_LENGTH) or p > (max_prime or MAX_PRIME):
        raise ResourceError(f"(p, m) = ({p}, {m}) exceeds the configured bound")


def _poly(p, kind, n):
    return _STORE.get(p, kind, n, _builder(p, kind))


@dataclass(frozen=True)
class StructurePolynomials:
    """Integer polynomials S_i, P_i (and negation N_i) with X_j -> var 2j, Y_j -> var 2j+1."""

    p: int
    m: int
    sums: tuple
    products: tuple
    negations: tuple

    @staticmethod
    def _sympy(poly):
        import sympy
        expr = sympy.Integer(0)
        for mono, c in poly.items():
            term = sympy.Integer(c)
            for v, e in mono:
                name = ("X" if v % 2 == 0 else "Y") + str(v // 2)
                term *= sympy.Symbol(name) ** e
            expr += term
        return expr

    def sum_expr(self, i):
        return self._sympy(self.sums[i])

    def product_expr(self, i):
        return self._sympy(self.products[i])


def structure_polynomials(p, m, max_length=None, max_prime=None):
    _check_bounds(p, m, max_length, max_prime)
    return StructurePolynomials(
        p, m,
        tuple(_poly(p, "sum", i) for i in range(m)),
        tuple(_poly(p, "prod", i) for i in range(m)),
        tuple(_poly(p, "neg", i) for i in range(m)),
    )


def frobenius_polynomials(p, n):
    """F_0..F_{n-1} with gh_i(F) = gh_{i+1}(X); only X variables occur."""
    _check_bounds(p, n + 1)
    return tuple(_poly(p, "frob", i) for i in range(n))


# -- evaluation ----------------------------------------------------------------

class _Plan:
    """Structure polynomials with coefficients mapped into a target ring."""

    def __init__(self, ring, polys):
        self.terms = [[(ring.from_int(c), mono) for mono, c in poly.items()] for poly in polys]

    def run(self, ring, values, count=None):
        if hasattr(ring, "work_mul"):
            return self._run_dicts(ring, values, count)
        powers = {}

        def power(v, e):
            key = (v, e)
            if key not in powers:
                powers[key] = ring.pow(values[v], e)
            return powers[key]

        out = []
        for terms in self.terms[:count]:
            acc = ring.zero
            for c, mono in terms:
                t = c
                for v, e in mono:
                    x = values[v]
                    if ring.is_zero(x):
                        t = ring.zero
                        break
                    t = ring.mul(t, power(v, e))
                if not ring.is_zero(t):
                    acc = ring.add(acc, t)
            out.append(acc)
        return out


    def _run_dicts(self, ring, values, count):
        # polynomial rings: multiply in dict form and sort once per output
        vals = [ring.to_work(v) for v in values]
        powers = {}

        def power(v, e):
            key = (v, e)
            if key not in powers:
                if e == 1:
                    powers[key] = vals[v]
                else:
                    half = power(v, e // 2)
                    sq = ring.work_mul(half, half)
                    powers[key] = ring.work_mul(sq, vals[v]) if e % 2 else sq
            return powers[key]

        out = []
        for terms in self.terms[:count]:
            acc = {}
            for c, mono in terms:
                if any(not vals[v] for v, _ in mono):
                    continue
                t = ring.to_work(c)
                for v, e in mono:
                    t = ring.work_mul(t, power(v, e))
                ring.work_add_into(acc, t)
            out.append(ring.from_work(acc))
        return out


def _interleave(x, y):
    vals = []
    for a, b in zip(x, y):
        vals.append(a)
        vals.append(b)
    return vals


class WittRing:
    """W_m(R) for a base ring R and prime p; elements are coordinate tuples."""

    MEMO_LIMIT = 1 << 20

    def __init__(self, ring: Ring, p, m):
        require_prime(p)
        if m < 0:
            raise ArgumentError("length must be non-negative")
        self.ring = ring
        self.p = p
        self.m = m
        self.char_p = ring.char_p and ring.p == p
        self._plans = {}
        self._memo = {} if ring.is_finite else None

    def __repr__(self):
        return f"W_{self.m}({self.ring}) [p={self.p}]"

    def __eq__(self, other):
        return isinstance(other, WittRing) and (self.ring, self.p, self.m) == (other.ring, other.p, other.m)

    def __hash__(self):
        return hash((self.ring, self.p, self.m))

    def _plan(self, kind):
        if kind not in self._plans:
            if kind == "frob":
                polys = frobenius_polynomials(self.p, max(self.m - 1, 0)) if self.m > 1 else ()
            else:
                sp = structure_polynomials(self.p, self.m) if self.m else None
                polys = () if sp is None else {"sum": sp.sums, "prod": sp.products,
                                              "neg": sp.negations}[kind]
            self._plans[kind] = _Plan(self.ring, polys)
        return self._plans[kind]

    # constants
    @property
    def zero(self):
        return tuple([self.ring.zero] * self.m)

    @property
    def one(self):
        if self.m == 0:
            return ()
        return (self.ring.one,) + tuple([self.ring.zero] * (self.m - 1))

    def coerce(self, coords):
        coords = tuple(self.ring.canon(c) for c in coords)
        if len(coords) != self.m:
            raise ArgumentError(f"expected {self.m} coordinates, got {len(coords)}")
        return coords

    def _memoized(self, key, compute):
        memo = self._memo
        if memo is None:
            return compute()
        val = memo.get(key)
        if val is None:
            val = compute()
            if len(memo) < self.MEMO_LIMIT:
                memo[key] = val
        return val

    # ring operations
    def add(self, x, y):
        if y == self.zero:
            return x
        if x == self.zero:
            return y
        return self._memoized(("+", x, y), lambda: tuple(
            self._plan("sum").run(self.ring, _interleave(x, y))))

    def neg(self, x):
        if self.p != 2:
            return tuple(self.ring.neg(c) for c in x)
        return self._memoized(("-", x), lambda: tuple(
            self._plan("neg").run(self.ring, _interleave(x, self.zero))))

    def sub(self, x, y):
        return self.add(x, self.neg(y))

    def mul(self, x, y):
        if x == self.zero or y == self.zero:
            return self.zero
        if x == self.one:
            return y
        if y == self.one:
            return x
        return self._memoized(("*", x, y), lambda: tuple(
            self._plan("prod").run(self.ring, _interleave(x, y))))

    def sum(self, items):
        acc = self.zero
        for t in items:
            acc = self.add(acc, t)
        return acc

    def from_int(self, n):
        if n < 0:
            return self.neg(self.from_int(-n))
        result, base = self.zero, self.one
        while n:
            if n & 1:
                result = self.add(result, base)
            n >>= 1
            if n:
                base = self.add(base, base)
        return result

    def mul_int(self, x, n):
        return self.mul(self.from_int(n), x)

    def pow(self, x, e):
        result, base = self.one, x
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def ghost_unit_coefficient(self, x, k):
        R, p = self.ring, self.p
        return R.sum(R.mul(R.from_int(p ** j), R.pow(x[j], p ** (k - j))) for j in range(k + 1))

    def is_unit(self, x):
        return self.m > 0 and self.ring.is_unit(x[0])

    def inv(self, x):
        if not self.is_unit(x):
            raise DomainError("zeroth coordinate is not a unit")
        R = self.ring
        y = [R.inv(x[0])] + [R.zero] * (self.m - 1)
        prod = self._plan("prod")
        for k in range(1, self.m):
            y[k] = R.zero
            c = prod.run(R, _interleave(x, y), count=k + 1)[k]
            y[k] = R.neg(R.mul(c, R.inv(self.ghost_unit_coefficient(x, k))))
        return tuple(y)

    # structure maps
    def teich(self, t):
        return (self.ring.canon(t),) + tuple([self.ring.zero] * (self.m - 1))

    def truncate(self, x, n):
        if n > len(x):
            raise ArgumentError("cannot truncate to a longer length")
        return tuple(x[:n])

    def V(self, y):
        """Verschiebung W_{m-1} -> W_m."""
        if len(y) != self.m - 1:
            raise ArgumentError(f"V expects length {self.m - 1}")
        return (self.ring.zero,) + tuple(y)

    def in_augmentation(self, x):
        return self.m == 0 or self.ring.is_zero(x[0])

    def frobenius(self, x, n=None):
        """sigma: W_m -> W_n, n <= m-1 (default m-1)."""
        n = self.m - 1 if n is None else n
        if n > self.m - 1 or n < 0:
            raise ArgumentError("frobenius lands in length at most m-1")
        if self.char_p:
            return tuple(self.ring.frob(c) for c in x[:n])
        return tuple(self._plan("frob").run(self.ring, _interleave(x, self.zero), count=n))

    def frobenius_endo(self, x):
        """Coordinatewise p-th power W_m -> W_m (characteristic p only)."""
        if not self.char_p:
            raise ArgumentError("the length-preserving frobenius needs p = 0 in the base ring")
        return tuple(self.ring.frob(c) for c in x)

    def frobenius_inverse(self, x):
        """Inverse of the coordinatewise frobenius over a perfect finite field."""
        if not hasattr(self.ring, "frob_inv"):
            raise ArgumentError("inverse frobenius needs a perfect base field")
        return tuple(self.ring.frob_inv(c) for c in x)

    def divided_frobenius(self, x, n=None):
        """sigma^div: I_m -> W_n, the inverse of V followed by truncation."""
        n = self.m - 1 if n is None else n
        if n > self.m - 1 or n < 0:
            raise ArgumentError("divided frobenius lands in length at most m-1")
        if not self.in_augmentation(x):
            raise DomainError("argument is not in the augmentation ideal")
        return tuple(x[1:1 + n])

    def ghost(self, x):
        R = self.ring
        if not R.torsion_free:
            raise ArgumentError(f"{R} has p-torsion; ghost components are not faithful")
        return tuple(self.ghost_unit_coefficient(x, i) for i in range(self.m))

    def map_coords(self, hom, x):
        return tuple(hom(c) for c in x)

    def random(self, rng, unit=False, ideal=False):
        coords = [self.ring.random(rng) for _ in range(self.m)]
        if ideal and self.m:
            coords[0] = self.ring.zero
        if unit and self.m:
            while not self.ring.is_unit(coords[0]):
                coords[0] = self.ring.random(rng)
        return tuple(coords)

    def elements(self):
        import itertools
        return itertools.product(list(self.ring.elements()), repeat=self.m)

    def valuation(self, x):
        """Index of the first nonzero coordinate (m for zero); the p-adic valuation
        over a perfect field of characteristic p."""
        for i, c in enumerate(x):
            if not self.ring.is_zero(c):
                return i
        return self.m


@lru_cache(maxsize=None)
def witt_ring(ring, p, m):
    return WittRing(ring, p, m)


@dataclass(frozen=True)
class WittVector:
    ring: Ring
    p: int
    coords: tuple

    @property
    def m(self):
        return len(self.coords)

    @property
    def W(self):
        return witt_ring(self.ring, self.p, self.m)

    def _other(self, y):
        if not isinstance(y, WittVector):
            return self.W.from_int(y)
        if (y.ring, y.p, y.m) != (self.ring, self.p, self.m):
            raise ArgumentError("Witt vectors over different rings or lengths")
        return y.coords

    def _wrap(self, coords):
        return WittVector(self.ring, self.p, tuple(coords))

    def __add__(self, y):
        return self._wrap(self.W.add(self.coords, self._other(y)))

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(self.W.neg(self.coords))

    def __sub__(self, y):
        return self._wrap(self.W.sub(self.coords, self._other(y)))

    def __mul__(self, y):
        return self._wrap(self.W.mul(self.coords, self._other(y)))

    __rmul__ = __mul__

    def inverse(self):
        return self._wrap(self.W.inv(self.coords))

    def frobenius(self, n=None):
        return self._wrap(self.W.frobenius(self.coords, n))

    def frobenius_endo(self):
        return self._wrap(self.W.frobenius_endo(self.coords))

    def divided_frobenius(self, n=None):
        return self._wrap(self.W.divided_frobenius(self.coords, n))

    def truncate(self, n):
        return self._wrap(self.coords[:n])

    def ghost(self):
        return self.W.ghost(self.coords)

    def in_augmentation(self):
        return self.W.in_augmentation(self.coords)

    def to_json(self):
        return {"p": self.p, "m": self.m,
                "coords": [self.ring.elem_to_json(c) for c in self.coords]}

    @classmethod
    def from_json(cls, ring, data):
        return cls(ring, data["p"], tuple(ring.elem_from_json(c) for c in data["coords"]))


def vector(ring, p, coords):
    return WittVector(ring, p, tuple(ring.canon(c) for c in coords))


def teichmuller(ring, p, m, t):
    return WittVector(ring, p, witt_ring(ring, p, m).teich(t))


def verschiebung(x: WittVector):
    return WittVector(x.ring, x.p, witt_ring(x.ring, x.p, x.m + 1).V(x.coords))


def witt_arithmetic(op, x, y=None):
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "sub":
        return x - y
    if op == "neg":
        return -x
    if op == "inv":
        return x.inverse()
    raise ArgumentError(f"unknown operation {op!r}")


def ghost_oracle(x: WittVector):
    return x.ghost()


def sigma_invariant_test(x: WittVector, n):
    """True iff sigma(x) agrees with x in the first n coordinates; n is required."""
    if n > x.m - 1 or n < 0:
        raise ArgumentError("n must satisfy 0 <= n <= m-1")
    return x.frobenius(n).coords == x.coords[:n]
