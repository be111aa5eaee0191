"""Computable base rings.

Every ring is a frozen descriptor; elements are plain hashable Python values in a
canonical form, so equality of elements is equality of values.

    integers        int
    prime-field     int in [0, p)
    modular         int in [0, p^k)
    galois-field    int code sum c_i p^i of the coefficient vector modulo the modulus
    polynomial      tuple of (exponents, coeff) sorted by descending graded-lex order
    quotient        canonical polynomial reduced by a Groebner basis
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce

from .errors import ArgumentError, DomainError, ResourceError


def is_prime(n):
    if n < 2:
        return False
    for d in range(2, int(math.isqrt(n)) + 1):
        if n % d == 0:
            return False
    return True


def require_prime(p):
    if not isinstance(p, int) or not is_prime(p):
        raise ArgumentError(f"{p!r} is not a prime")
    return p


class Ring:
    """Shared operations; subclasses supply p, add, neg, mul, zero, one, from_int."""

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def pow(self, a, e):
        if e < 0:
            return self.pow(self.inv(a), -e)
        result = self.one
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            e >>= 1
            if e:
                base = self.mul(base, base)
        return result

    def is_zero(self, a):
        return a == self.zero

    def sum(self, items):
        return reduce(self.add, items, self.zero)

    def frob(self, a):
        return self.pow(a, self.p)

    @property
    def char_p(self):
        """True when p = 0 in the ring."""
        return self.p is not None and self.is_zero(self.from_int(self.p))

    @property
    def torsion_free(self):
        return False

    @property
    def is_finite(self):
        return False

    def elements(self):
        raise ArgumentError(f"{self} is not enumerable")

    def canon(self, data):
        return data

    def ideal_contains_one(self, elems):
        return any(self.is_unit(a) for a in elems)

    def element(self, data):
        return RingElement(self, self.canon(data))


@dataclass(frozen=True)
class Integers(Ring):
    kind = "integers"
    p = None

    zero = 0
    one = 1

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def from_int(self, n):
        return int(n)

    def is_unit(self, a):
        return a in (1, -1)

    def inv(self, a):
        if a not in (1, -1):
            raise DomainError(f"{a} is not a unit in Z")
        return a

    @property
    def torsion_free(self):
        return True

    def ideal_contains_one(self, elems):
        return reduce(math.gcd, elems, 0) == 1

    def residue_mod_p(self, p):
        return PrimeField(p), lambda a: a % p

    def random(self, rng):
        return rng.randint(-3, 3)

    def to_json(self):
        return {"kind": self.kind}

    def elem_to_json(self, a):
        return a

    def elem_from_json(self, data):
        return int(data)

    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class Modular(Ring):
    """Z/p^k."""

    p: int
    k: int = 1
    kind = "modular"

    def __post_init__(self):
        require_prime(self.p)
        if self.k < 1:
            raise ArgumentError("k must be at least 1")

    @cached_property
    def modulus(self):
        return self.p ** self.k

    zero = 0
    one = 1

    def add(self, a, b):
        return (a + b) % self.modulus

    def neg(self, a):
        return (-a) % self.modulus

    def mul(self, a, b):
        return (a * b) % self.modulus

    def from_int(self, n):
        return n % self.modulus

    def canon(self, data):
        return int(data) % self.modulus

    def is_unit(self, a):
        return a % self.p != 0

    def inv(self, a):
        if a % self.p == 0:
            raise DomainError(f"{a} is not a unit mod {self.modulus}")
        return pow(a, -1, self.modulus)

    def valuation(self, a):
        if a == 0:
            return self.k
        v = 0
        while a % self.p == 0:
            a //= self.p
            v += 1
        return v

    @property
    def is_finite(self):
        return True

    def elements(self):
        return range(self.modulus)

    def residue_mod_p(self, p=None):
        return PrimeField(self.p), lambda a: a % self.p

    def random(self, rng):
        return rng.randrange(self.modulus)

    def to_json(self):
        return {"kind": self.kind, "p": self.p, "k": self.k}

    def elem_to_json(self, a):
        return a

    def elem_from_json(self, data):
        return self.canon(data)

    def __str__(self):
        return f"Z/{self.p}^{self.k}"


class _FiniteField(Ring):
    """Shared finite field behaviour; elements are int codes 0..q-1."""

    zero = 0
    one = 1

    @property
    def is_finite(self):
        return True

    def elements(self):
        return range(self.q)

    def is_unit(self, a):
        return a != 0

    def residue_mod_p(self, p=None):
        return self, lambda a: a

    def random(self, rng):
        return rng.randrange(self.q)

    def frob_inv(self, a):
        """Inverse of the p-th power map (the field is perfect)."""
        return self.pow(a, self.q // self.p)

    def ideal_contains_one(self, elems):
        return any(a != 0 for a in elems)


@dataclass(frozen=True)
class PrimeField(_FiniteField):
    p: int
    kind = "prime-field"

    def __post_init__(self):
        require_prime(self.p)

    @property
    def q(self):
        return self.p

    @property
    def degree(self):
        return 1

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def from_int(self, n):
        return n % self.p

    def canon(self, data):
        return int(data) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise DomainError("zero is not invertible")
        return pow(a, -1, self.p)

    def frob(self, a):
        return a

    def frob_inv(self, a):
        return a

    def to_json(self):
        return {"kind": self.kind, "p": self.p}

    def elem_to_json(self, a):
        return a

    def elem_from_json(self, data):
        return self.canon(data)

    def __str__(self):
        return f"F_{self.p}"


def _poly_mod_p_irreducible(coeffs, p):
    """Brute-force irreducibility of a monic polynomial over F_p (small degree)."""
    k = len(coeffs) - 1
    for deg in range(1, k // 2 + 1):
        for tail in itertools.product(range(p), repeat=deg):
            divisor = list(tail) + [1]
            rem = list(coeffs)
            for shift in range(k - deg, -1, -1):
                c = rem[shift + deg]
                if c:
                    for i, dc in enumerate(divisor):
                        rem[shift + i] = (rem[shift + i] - c * dc) % p
            if not any(rem[:deg]):
                return False
    return True


def conway_free_modulus(p, k):
    """Lexicographically first monic irreducible polynomial of degree k over F_p."""
    for tail in itertools.product(range(p), repeat=k):
        coeffs = tuple(reversed(tail)) + (1,)
        if coeffs[0] != 0 and _poly_mod_p_irreducible(coeffs, p):
            return coeffs
    raise ArgumentError(f"no irreducible polynomial of degree {k} over F_{p}")


@dataclass(frozen=True)
class GaloisField(_FiniteField):
    """F_p[t]/(modulus); modulus given low-to-high and monic."""

    p: int
    modulus: tuple
    kind = "galois-field"

    def __post_init__(self):
        require_prime(self.p)
        mod = tuple(int(c) % self.p for c in self.modulus)
        object.__setattr__(self, "modulus", mod)
        if len(mod) < 2 or mod[-1] != 1:
            raise ArgumentError("modulus must be monic of degree >= 1")
        if not _poly_mod_p_irreducible(mod, self.p):
            raise ArgumentError(f"modulus {mod} is not irreducible over F_{self.p}")

    @classmethod
    def of(cls, p, k):
        return cls(p, conway_free_modulus(p, k))

    @property
    def degree(self):
        return len(self.modulus) - 1

    @cached_property
    def q(self):
        return self.p ** self.degree

    def to_coeffs(self, a):
        out = []
        for _ in range(self.degree):
            a, r = divmod(a, self.p)
            out.append(r)
        return out

    def from_coeffs(self, coeffs):
        code = 0
        for c in reversed(list(coeffs)):
            code = code * self.p + (c % self.p)
        return code

    def _mul_direct(self, a, b):
        p, k = self.p, self.degree
        x, y = self.to_coeffs(a), self.to_coeffs(b)
        prod = [0] * (2 * k - 1)
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    prod[i + j] = (prod[i + j] + xi * yj) % p
        for shift in range(k - 2, -1, -1):
            c = prod[shift + k]
            if c:
                for i in range(k + 1):
                    prod[shift + i] = (prod[shift + i] - c * self.modulus[i]) % p
        return self.from_coeffs(prod[:k])

    @cached_property
    def tables(self):
        """(add, mul, neg, inv) lookup tables as nested lists."""
        q = self.q
        if q > 1024:
            raise ResourceError("field too large for lookup tables")
        add = [[self.from_coeffs([(u + v) for u, v in zip(self.to_coeffs(a), self.to_coeffs(b))])
                for b in range(q)] for a in range(q)]
        mul = [[self._mul_direct(a, b) for b in range(q)] for a in range(q)]
        neg = [self.from_coeffs([-c for c in self.to_coeffs(a)]) for a in range(q)]
        inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if mul[a][b] == 1:
                    inv[a] = b
                    break
        return add, mul, neg, inv

    def add(self, a, b):
        return self.tables[0][a][b]

    def neg(self, a):
        return self.tables[2][a]

    def mul(self, a, b):
        return self.tables[1][a][b]

    def from_int(self, n):
        return n % self.p

    def canon(self, data):
        if isinstance(data, (list, tuple)):
            return self.from_coeffs(data)
        if not 0 <= int(data) < self.q:
            raise ArgumentError(f"{data} is not a field element code")
        return int(data)

    def inv(self, a):
        if a == 0:
            raise DomainError("zero is not invertible")
        return self.tables[3][a]

    def generator(self):
        return self.p if self.degree > 1 else 1

    def to_json(self):
        return {"kind": self.kind, "p": self.p, "degree": self.degree,
                "modulus": list(self.modulus)}

    def elem_to_json(self, a):
        return self.to_coeffs(a)

    def elem_from_json(self, data):
        return self.canon(data)

    def __str__(self):
        return f"F_{self.q}"


def finite_field(q):
    """F_q with the default modulus."""
    for p in range(2, q + 1):
        if q % p == 0:
            break
    k, r = 0, q
    while r % p == 0:
        r //= p
        k += 1
    if r != 1 or not is_prime(p):
        raise ArgumentError(f"{q} is not a prime power")
    return PrimeField(p) if k == 1 else GaloisField.of(p, k)


def _grlex_key(exps):
    return (sum(exps), exps)


@dataclass(frozen=True)
class PolynomialRing(Ring):
    """base[variables], graded lex order with the declared variable order."""

    base: Ring
    variables: tuple
    kind = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if len(set(self.variables)) != len(self.variables) or not self.variables:
            raise ArgumentError("variables must be distinct and non-empty")

    @property
    def p(self):
        return self.base.p

    @property
    def nvars(self):
        return len(self.variables)

    @property
    def torsion_free(self):
        return self.base.torsion_free

    @cached_property
    def zero(self):
        return ()

    @cached_property
    def one(self):
        return self.from_int(1)

    def _to_dict(self, a):
        return dict(a)

    def _from_dict(self, d):
        base = self.base
        items = [(e, c) for e, c in d.items() if not base.is_zero(c)]
        items.sort(key=lambda t: _grlex_key(t[0]), reverse=True)
        return tuple(items)

    def add(self, a, b):
        d = dict(a)
        base = self.base
        for e, c in b:
            d[e] = base.add(d[e], c) if e in d else c
        return self._from_dict(d)

    def neg(self, a):
        return tuple((e, self.base.neg(c)) for e, c in a)

    def mul(self, a, b):
        if not a or not b:
            return ()
        return self.from_work(self.work_mul(self.to_work(a), self.to_work(b)))

    # Work form: dict keyed by exponents packed into one int (16 bits per
    # variable), so monomial products are integer additions.
    _SHIFT = 16

    def to_work(self, a):
        out = {}
        for e, c in a:
            key = 0
            for k in reversed(e):
                key = (key << self._SHIFT) | k
            out[key] = c
        return out

    def from_work(self, d):
        mask = (1 << self._SHIFT) - 1
        out = {}
        for key, c in d.items():
            e = []
            for _ in range(self.nvars):
                e.append(key & mask)
                key >>= self._SHIFT
            out[tuple(e)] = c
        return self._from_dict(out)

    def work_mul(self, a, b):
        base = self.base
        d = {}
        if isinstance(base, Integers):
            get = d.get
            for ea, ca in a.items():
                for eb, cb in b.items():
                    e = ea + eb
                    d[e] = get(e, 0) + ca * cb
            return {e: c for e, c in d.items() if c}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = ea + eb
                c = base.mul(ca, cb)
                d[e] = base.add(d[e], c) if e in d else c
        return d

    def pow(self, a, e):
        if e < 0:
            return self.pow(self.inv(a), -e)
        if not a:
            return self.one if e == 0 else ()
        result = self.to_work(self.one)
        base = self.to_work(a)
        while e:
            if e & 1:
                result = self.work_mul(result, base)
            e >>= 1
            if e:
                base = self.work_mul(base, base)
        return self.from_work(result)

    def work_add_into(self, acc, b):
        base = self.base
        for e, c in b.items():
            acc[e] = base.add(acc[e], c) if e in acc else c

    def scale(self, c, a):
        base = self.base
        return self._from_dict({e: base.mul(c, x) for e, x in a})

    def from_int(self, n):
        return self.constant(self.base.from_int(n))

    def constant(self, c):
        if self.base.is_zero(c):
            return ()
        return ((tuple([0] * self.nvars), c),)

    def var(self, name):
        i = self.variables.index(name)
        e = [0] * self.nvars
        e[i] = 1
        return ((tuple(e), self.base.one),)

    def monomial(self, exps, c=None):
        c = self.base.one if c is None else c
        return self._from_dict({tuple(exps): c})

    def canon(self, data):
        if isinstance(data, dict):
            return self._from_dict({tuple(e): self.base.canon(c) for e, c in data.items()})
        return self._from_dict({tuple(e): self.base.canon(c) for e, c in data})

    def is_unit(self, a):
        if len(a) == 1 and not any(a[0][0]):
            return self.base.is_unit(a[0][1])
        if self.base.char_p:
            return False
        # Over Z/p^k: unit iff constant term is a unit and the rest is nilpotent.
        if isinstance(self.base, Modular):
            const = dict(a).get(tuple([0] * self.nvars), 0)
            return self.base.is_unit(const) and all(
                c % self.base.p == 0 for e, c in a if any(e))
        return False

    def inv(self, a):
        if len(a) == 1 and not any(a[0][0]):
            return self.constant(self.base.inv(a[0][1]))
        if self.is_unit(a):
            # 1/(u - n) = u^-1 sum (n/u)^i with n nilpotent
            const = dict(a)[tuple([0] * self.nvars)]
            u_inv = self.constant(self.base.inv(const))
            nil = self.neg(self.sub(a, self.constant(const)))
            t = self.mul(u_inv, nil)
            total, term = self.one, self.one
            for _ in range(self.base.k * 4 + 4):
                term = self.mul(term, t)
                if not term:
                    break
                total = self.add(total, term)
            return self.mul(u_inv, total)
        raise DomainError(f"{self.fmt(a)} is not a unit")

    def degree(self, a):
        return max((sum(e) for e, _ in a), default=-1)

    def leading(self, a):
        return a[0] if a else None

    def evaluate(self, a, values, target, coeff_map):
        total = target.zero
        for e, c in a:
            term = coeff_map(c)
            for v, k in zip(values, e):
                if k:
                    term = target.mul(term, target.pow(v, k))
            total = target.add(total, term)
        return total

    def residue_mod_p(self, p=None):
        p = self.p if p is None else p
        rbase, f = self.base.residue_mod_p(p)
        ring = PolynomialRing(rbase, self.variables)
        return ring, lambda a: ring._from_dict({e: f(c) for e, c in a})

    def ideal_contains_one(self, elems):
        elems = [a for a in elems if a]
        if any(self.is_unit(a) for a in elems):
            return True
        if isinstance(self.base, PrimeField) and elems:
            import sympy
            gens = sympy.symbols(self.variables)
            polys = [self.to_sympy(a, gens) for a in elems]
            gb = sympy.groebner(polys, *gens, modulus=self.base.p, order="grlex")
            return list(gb.exprs) == [1]
        if isinstance(self.base, Integers) and elems:
            import sympy
            gens = sympy.symbols(self.variables)
            polys = [self.to_sympy(a, gens) for a in elems]
            gb = sympy.groebner(polys, *gens, order="grlex", domain="ZZ")
            return list(gb.exprs) == [1]
        return False

    def to_sympy(self, a, gens):
        import sympy
        expr = sympy.Integer(0)
        for e, c in a:
            term = sympy.Integer(int(c))
            for g, k in zip(gens, e):
                term *= g ** k
            expr += term
        return expr

    def random(self, rng, terms=3, max_degree=2):
        d = {}
        for _ in range(rng.randint(0, terms)):
            e = [0] * self.nvars
            for _ in range(rng.randint(0, max_degree)):
                e[rng.randrange(self.nvars)] += 1
            d[tuple(e)] = self.base.random(rng)
        return self._from_dict(d)

    def fmt(self, a):
        if not a:
            return "0"
        parts = []
        for e, c in a:
            mono = "*".join(f"{v}^{k}" if k > 1 else v
                            for v, k in zip(self.variables, e) if k)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)

    def to_json(self):
        return {"kind": self.kind, "base": self.base.to_json(),
                "variables": list(self.variables)}

    def elem_to_json(self, a):
        return [[list(e), self.base.elem_to_json(c)] for e, c in a]

    def elem_from_json(self, data):
        return self._from_dict({tuple(e): self.base.elem_from_json(c) for e, c in data})

    def __str__(self):
        return f"{self.base}[{','.join(self.variables)}]"


def _divides(e, f):
    return all(x <= y for x, y in zip(e, f))


@dataclass(frozen=True)
class QuotientRing(Ring):
    """poly_ring/(generators); the base of poly_ring must be a prime field."""

    ring: PolynomialRing
    generators: tuple
    kind = "quotient"

    def __post_init__(self):
        if not isinstance(self.ring, PolynomialRing):
            raise ArgumentError("quotients are taken of polynomial rings")
        if not isinstance(self.ring.base, PrimeField):
            raise ArgumentError("quotient rings need a prime-field coefficient ring")
        gens = tuple(self.ring.canon(g) for g in self.generators)
        object.__setattr__(self, "generators", gens)

    @property
    def p(self):
        return self.ring.p

    @cached_property
    def basis(self):
        """Reduced Groebner basis (grlex), monic, as canonical polynomials."""
        import sympy
        R = self.ring
        gens = sympy.symbols(R.variables)
        polys = [R.to_sympy(g, gens) for g in self.generators if g]
        if not polys:
            return ()
        gb = sympy.groebner(polys, *gens, modulus=R.base.p, order="grlex")
        out = []
        for expr in gb.exprs:
            poly = sympy.Poly(expr, *gens, modulus=R.base.p)
            d = {tuple(m): int(c) % R.base.p for m, c in zip(poly.monoms(), poly.coeffs())}
            out.append(R._from_dict(d))
        result = []
        for g in out:
            lc = g[0][1]
            result.append(R.scale(R.base.inv(lc), g))
        return tuple(result)

    def reduce(self, a):
        R = self.ring
        base = R.base
        basis = self.basis
        if not basis:
            return a
        rem = {}
        work = dict(a)
        while work:
            e = max(work, key=_grlex_key)
            c = work.pop(e)
            for g in basis:
                lead_e = g[0][0]
                if _divides(lead_e, e):
                    shift = tuple(x - y for x, y in zip(e, lead_e))
                    for ge, gc in g[1:]:
                        ne = tuple(x + y for x, y in zip(ge, shift))
                        nc = base.neg(base.mul(c, gc))
                        val = base.add(work.get(ne, 0), nc)
                        if val:
                            work[ne] = val
                        else:
                            work.pop(ne, None)
                    break
            else:
                rem[e] = c
        return R._from_dict(rem)

    @cached_property
    def zero(self):
        return ()

    @cached_property
    def one(self):
        return self.reduce(self.ring.one)

    def add(self, a, b):
        return self.ring.add(a, b)

    def neg(self, a):
        return self.ring.neg(a)

    def mul(self, a, b):
        return self.reduce(self.ring.mul(a, b))

    def from_int(self, n):
        return self.reduce(self.ring.from_int(n))

    def var(self, name):
        return self.reduce(self.ring.var(name))

    def canon(self, data):
        return self.reduce(self.ring.canon(data))

    @cached_property
    def standard_monomials(self):
        """Monomials not divisible by a leading term; None if infinitely many."""
        n = self.ring.nvars
        leads = [g[0][0] for g in self.basis]
        bounds = []
        for i in range(n):
            pure = [e[i] for e in leads if all(e[j] == 0 for j in range(n) if j != i) and e[i] > 0]
            if not pure:
                return None
            bounds.append(min(pure))
        monos = [e for e in itertools.product(*(range(b) for b in bounds))
                 if not any(_divides(l, e) for l in leads)]
        monos.sort(key=_grlex_key, reverse=True)
        return tuple(monos)

    @property
    def is_finite(self):
        return self.standard_monomials is not None

    def elements(self):
        monos = self.standard_monomials
        if monos is None:
            raise ArgumentError(f"{self} is infinite")
        p = self.ring.base.p
        for coeffs in itertools.product(range(p), repeat=len(monos)):
            yield self.ring._from_dict(dict(zip(monos, coeffs)))

    def _vector(self, a):
        d = dict(a)
        return [d.get(m, 0) for m in self.standard_monomials]

    def _solve_mod_p(self, rows, rhs):
        """Solve sum_j x_j * rows[j] = rhs over F_p; rows are vectors."""
        from ._kernels import solve_prime
        return solve_prime(rows, rhs, self.ring.base.p)

    def is_unit(self, a):
        if self.is_finite:
            return self.ideal_contains_one([a])
        return len(a) == 1 and not any(a[0][0]) and a[0][1] != 0

    def inv(self, a):
        if not self.is_finite:
            if len(a) == 1 and not any(a[0][0]):
                return self.ring.constant(self.ring.base.inv(a[0][1]))
            raise DomainError("inverse undecided in an infinite quotient")
        monos = self.standard_monomials
        rows = [self._vector(self.mul(a, self.ring.monomial(m))) for m in monos]
        sol = self._solve_mod_p(rows, self._vector(self.one))
        if sol is None:
            raise DomainError(f"{self.ring.fmt(a)} is not a unit")
        return self.ring._from_dict(dict(zip(monos, sol)))

    def ideal_contains_one(self, elems):
        if not self.is_finite:
            return any(self.is_unit(a) for a in elems)
        monos = self.standard_monomials
        rows = [self._vector(self.mul(a, self.ring.monomial(m))) for a in elems for m in monos]
        if not rows:
            return False
        return self._solve_mod_p(rows, self._vector(self.one)) is not None

    def residue_mod_p(self, p=None):
        return self, lambda a: a

    def random(self, rng):
        if self.is_finite:
            p = self.ring.base.p
            return self.ring._from_dict({m: rng.randrange(p) for m in self.standard_monomials})
        return self.reduce(self.ring.random(rng))

    def fmt(self, a):
        return self.ring.fmt(a)

    def to_json(self):
        return {"kind": self.kind, "ring": self.ring.to_json(),
                "generators": [self.ring.elem_to_json(g) for g in self.generators]}

    def elem_to_json(self, a):
        return self.ring.elem_to_json(a)

    def elem_from_json(self, data):
        return self.reduce(self.ring.elem_from_json(data))

    def __str__(self):
        return f"{self.ring}/({', '.join(self.ring.fmt(g) for g in self.generators)})"


def ring_from_json(data):
    kind = data["kind"]
    if kind == "integers":
        return Integers()
    if kind == "prime-field":
        return PrimeField(data["p"])
    if kind == "modular":
        return Modular(data["p"], data["k"])
    if kind == "galois-field":
        return GaloisField(data["p"], tuple(data["modulus"]))
    if kind == "polynomial":
        return PolynomialRing(ring_from_json(data["base"]), tuple(data["variables"]))
    if kind == "quotient":
        poly = ring_from_json(data["ring"])
        return QuotientRing(poly, tuple(poly.elem_from_json(g) for g in data["generators"]))
    raise ArgumentError(f"unknown ring kind {kind!r}")


def truncated_polynomial(p, var="x", degree=2):
    """F_p[var]/(var^degree)."""
    R = PolynomialRing(PrimeField(p), (var,))
    return QuotientRing(R, (R.monomial((degree,)),))


@dataclass(frozen=True)
class RingElement:
    """A ring value bundled with its ring, with arithmetic operators."""

    ring: Ring
    data: object

    def _coerce(self, other):
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise ArgumentError("ring mismatch")
            return other.data
        return self.ring.from_int(other)

    def __add__(self, other):
        return RingElement(self.ring, self.ring.add(self.data, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return RingElement(self.ring, self.ring.sub(self.data, self._coerce(other)))

    def __neg__(self):
        return RingElement(self.ring, self.ring.neg(self.data))

    def __mul__(self, other):
        return RingElement(self.ring, self.ring.mul(self.data, self._coerce(other)))

    __rmul__ = __mul__

    def __pow__(self, e):
        return RingElement(self.ring, self.ring.pow(self.data, e))

    def inverse(self):
        return RingElement(self.ring, self.ring.inv(self.data))

    def is_unit(self):
        return self.ring.is_unit(self.data)


@dataclass(frozen=True)
class RingHom:
    """Ring map determined by images of generators; relations are checked on creation.

    images: for galois-field sources the image of the generator t; for polynomial and
    quotient sources one image per variable. base_hom maps the coefficient ring of a
    polynomial source when it is not a prime ring.
    """

    source: Ring
    target: Ring
    images: tuple = ()
    base_hom: "RingHom | None" = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.target.canon(x) for x in self.images))
        self._check()

    def _check(self):
        S, T = self.source, self.target
        if isinstance(S, Integers):
            return
        if isinstance(S, Modular):
            if not T.is_zero(T.from_int(S.modulus)):
                raise ArgumentError(f"{S.modulus} is not zero in {T}")
            return
        if isinstance(S, PrimeField):
            if not T.is_zero(T.from_int(S.p)):
                raise ArgumentError(f"{S.p} is not zero in {T}")
            return
        if isinstance(S, GaloisField):
            if len(self.images) != 1 or not T.char_p or T.p != S.p:
                raise ArgumentError("galois-field hom needs one image in characteristic p")
            val = T.zero
            for c in reversed(S.modulus):
                val = T.add(T.mul(val, self.images[0]), T.from_int(c))
            if not T.is_zero(val):
                raise ArgumentError("image of the generator is not a root of the modulus")
            return
        if isinstance(S, PolynomialRing):
            if len(self.images) != S.nvars:
                raise ArgumentError("one image per variable is required")
            return
        if isinstance(S, QuotientRing):
            if len(self.images) != S.ring.nvars:
                raise ArgumentError("one image per variable is required")
            for g in S.generators:
                if not T.is_zero(self._eval_poly(S.ring, g)):
                    raise ArgumentError(f"relation {S.ring.fmt(g)} does not map to zero")
            return
        raise ArgumentError(f"unsupported source {S}")

    def _coeff(self, c, base):
        if self.base_hom is not None:
            return self.base_hom(c)
        if isinstance(base, (Integers, Modular, PrimeField)):
            return self.target.from_int(c)
        raise ArgumentError(f"a base_hom is required for coefficients in {base}")

    def _eval_poly(self, ring, a):
        return ring.evaluate(a, self.images, self.target, lambda c: self._coeff(c, ring.base))

    def __call__(self, a):
        S, T = self.source, self.target
        if isinstance(S, (Integers, Modular, PrimeField)):
            return T.from_int(a)
        if isinstance(S, GaloisField):
            val = T.zero
            for c in reversed(S.to_coeffs(a)):
                val = T.add(T.mul(val, self.images[0]), T.from_int(c))
            return val
        if isinstance(S, PolynomialRing):
            return self._eval_poly(S, a)
        return self._eval_poly(S.ring, a)

    @classmethod
    def identity(cls, ring):
        if isinstance(ring, GaloisField):
            return cls(ring, ring, (ring.generator(),))
        if isinstance(ring, PolynomialRing):
            return cls(ring, ring, tuple(ring.var(v) for v in ring.variables),
                       base_hom=None if isinstance(ring.base, (Integers, Modular, PrimeField))
                       else cls.identity(ring.base))
        if isinstance(ring, QuotientRing):
            return cls(ring, ring, tuple(ring.var(v) for v in ring.ring.variables))
        return cls(ring, ring)


def field_embedding(source, target):
    """Some embedding F_q -> F_q' (first root of the modulus in code order)."""
    if isinstance(source, PrimeField):
        return RingHom(source, target)
    for t in target.elements():
        try:
            return RingHom(source, target, (t,))
        except ArgumentError:
            continue
    raise ArgumentError(f"{source} does not embed into {target}")
