"""Matrices over W_m(R), residue ranks, chain-ring normal forms, duals and twists."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ArgumentError, DomainError
from .rings import Modular, PrimeField, GaloisField
from .witt import WittRing, WittVector, witt_ring


def _coerce_entry(W, x):
    if isinstance(x, WittVector):
        return x.coords
    if isinstance(x, int):
        return W.from_int(x)
    return W.coerce(x)


class WittMatrix:
    """Dense matrix with entries in W = W_m(R); entries are coordinate tuples."""

    __slots__ = ("W", "rows", "nrows", "ncols")

    def __init__(self, W: WittRing, rows, ncols=None):
        self.W = W
        self.rows = tuple(tuple(r) for r in rows)
        self.nrows = len(self.rows)
        self.ncols = len(self.rows[0]) if self.rows else (ncols or 0)

    @classmethod
    def from_entries(cls, W, entries, ncols=None):
        return cls(W, [[_coerce_entry(W, x) for x in row] for row in entries], ncols)

    @classmethod
    def identity(cls, W, n):
        return cls(W, [[W.one if i == j else W.zero for j in range(n)] for i in range(n)], n)

    @classmethod
    def zeros(cls, W, r, c):
        return cls(W, [[W.zero] * c for _ in range(r)], c)

    @classmethod
    def diagonal(cls, W, entries):
        n = len(entries)
        entries = [_coerce_entry(W, x) for x in entries]
        return cls(W, [[entries[i] if i == j else W.zero for j in range(n)] for i in range(n)], n)

    @classmethod
    def blocks(cls, W, grid):
        """Assemble from a grid of WittMatrix blocks."""
        rows = []
        for brow in grid:
            h = brow[0].nrows
            for i in range(h):
                rows.append(sum((b.rows[i] for b in brow), ()))
        ncols = sum(b.ncols for b in grid[0])
        return cls(W, rows, ncols)

    def __eq__(self, other):
        return (isinstance(other, WittMatrix) and self.W == other.W
                and self.shape == other.shape and self.rows == other.rows)

    def __hash__(self):
        return hash((self.W, self.rows))

    def __repr__(self):
        return f"WittMatrix({self.W}, {[list(r) for r in self.rows]})"

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def entry(self, i, j):
        return WittVector(self.W.ring, self.W.p, self.rows[i][j])

    def _same(self, other):
        if self.W != other.W:
            raise ArgumentError(f"matrices over {self.W} and {other.W}")

    def __add__(self, other):
        self._same(other)
        if self.shape != other.shape:
            raise ArgumentError("shape mismatch")
        W = self.W
        return WittMatrix(W, [[W.add(a, b) for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)], self.ncols)

    def __neg__(self):
        W = self.W
        return WittMatrix(W, [[W.neg(a) for a in r] for r in self.rows], self.ncols)

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other):
        self._same(other)
        if self.ncols != other.nrows:
            raise ArgumentError(f"cannot multiply {self.shape} by {other.shape}")
        W = self.W
        zero = W.zero
        cols = list(zip(*other.rows)) if other.rows else [()] * other.ncols
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = zero
                for a, b in zip(r, c):
                    if a != zero and b != zero:
                        acc = W.add(acc, W.mul(a, b))
                row.append(acc)
            out.append(row)
        return WittMatrix(W, out, other.ncols)

    def scale(self, s):
        W = self.W
        s = _coerce_entry(W, s)
        return WittMatrix(W, [[W.mul(s, a) for a in r] for r in self.rows], self.ncols)

    def transpose(self):
        return WittMatrix(self.W, list(zip(*self.rows)) if self.rows else [], self.nrows)

    T = property(transpose)

    def is_zero(self):
        z = self.W.zero
        return all(a == z for r in self.rows for a in r)

    def submatrix(self, rows, cols):
        return WittMatrix(self.W, [[self.rows[i][j] for j in cols] for i in rows], len(cols))

    def block(self, r0, r1, c0, c1):
        return self.submatrix(range(r0, r1), range(c0, c1))

    def map_entries(self, W2, fn):
        return WittMatrix(W2, [[fn(a) for a in r] for r in self.rows], self.ncols)

    def truncate(self, n):
        return self.map_entries(witt_ring(self.W.ring, self.W.p, n), lambda a: a[:n])

    def frobenius_twist(self, n=None):
        """Entrywise sigma: W_m -> W_n (default n = m-1)."""
        n = self.W.m - 1 if n is None else n
        W2 = witt_ring(self.W.ring, self.W.p, n)
        return self.map_entries(W2, lambda a: self.W.frobenius(a, n))

    def frobenius_endo(self):
        return self.map_entries(self.W, self.W.frobenius_endo)

    def frobenius_inverse(self):
        return self.map_entries(self.W, self.W.frobenius_inverse)

    def divided_frobenius(self, n=None):
        """Entrywise sigma^div: entries must lie in the augmentation ideal."""
        n = self.W.m - 1 if n is None else n
        W2 = witt_ring(self.W.ring, self.W.p, n)
        return self.map_entries(W2, lambda a: self.W.divided_frobenius(a, n))

    def base_change(self, hom):
        W2 = witt_ring(hom.target, self.W.p, self.W.m)
        return self.map_entries(W2, lambda a: tuple(hom(c) for c in a))

    def in_augmentation(self):
        return all(self.W.in_augmentation(a) for r in self.rows for a in r)

    def det(self):
        if self.nrows != self.ncols:
            raise ArgumentError("determinant of a non-square matrix")
        return _det(self.W, self.rows)

    def inverse(self):
        if self.nrows != self.ncols:
            raise ArgumentError("inverse of a non-square matrix")
        inv = _gauss_inverse(self.W, self.rows)
        if inv is None:
            d = self.det()
            if not self.W.is_unit(d):
                raise DomainError("matrix is not invertible")
            inv = _adjugate_inverse(self.W, self.rows, d)
        return WittMatrix(self.W, inv, self.ncols)

    def is_invertible(self):
        return self.nrows == self.ncols and self.W.is_unit(self.det())

    def residue(self, mode="mod-I"):
        """Reduction modulo I_m (zeroth coordinates) and optionally modulo p."""
        R = self.W.ring
        rows = [[a[0] for a in r] for r in self.rows]
        if mode == "mod-I":
            return ResidueMatrix(R, rows, self.ncols)
        if mode == "mod-p":
            Rp, f = R.residue_mod_p(self.W.p)
            return ResidueMatrix(Rp, [[f(a) for a in r] for r in rows], self.ncols)
        raise ArgumentError(f"unknown residue mode {mode!r}")

    def to_json(self):
        R = self.W.ring
        return [[[R.elem_to_json(c) for c in a] for a in r] for r in self.rows]

    @classmethod
    def from_json(cls, W, data):
        return cls(W, [[tuple(W.ring.elem_from_json(c) for c in a) for a in r] for r in data],
                   None if data else 0)


def _det(W, rows):
    n = len(rows)
    if n == 0:
        return W.one
    # Laplace expansion along rows with memo on the set of used columns.
    memo = {}

    def go(i, used):
        if i == n:
            return W.one
        key = used
        if key in memo:
            return memo[key]
        acc = W.zero
        sign_pos = 0
        for j in range(n):
            if used >> j & 1:
                continue
            a = rows[i][j]
            if a != W.zero:
                term = W.mul(a, go(i + 1, used | (1 << j)))
                acc = W.sub(acc, term) if sign_pos % 2 else W.add(acc, term)
            sign_pos += 1
        memo[key] = acc
        return acc

    return go(0, 0)


def _gauss_inverse(W, rows):
    """Gauss-Jordan with unit pivots; None if no unit pivot is found."""
    n = len(rows)
    A = [list(r) + [W.one if i == j else W.zero for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((r for r in range(c, n) if W.is_unit(A[r][c])), None)
        if piv is None:
            return None
        A[c], A[piv] = A[piv], A[c]
        s = W.inv(A[c][c])
        A[c] = [W.mul(s, a) for a in A[c]]
        for r in range(n):
            if r != c and A[r][c] != W.zero:
                f = A[r][c]
                A[r] = [W.sub(a, W.mul(f, b)) for a, b in zip(A[r], A[c])]
    return [r[n:] for r in A]


def _adjugate_inverse(W, rows, d):
    n = len(rows)
    dinv = W.inv(d)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[rows[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = _det(W, minor)
            if (i + j) % 2:
                cof = W.neg(cof)
            out[j][i] = W.mul(cof, dinv)
    return out


@dataclass(frozen=True)
class ResidueMatrix:
    ring: object
    rows: tuple
    ncols: int

    def __init__(self, ring, rows, ncols):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "rows", tuple(tuple(r) for r in rows))
        object.__setattr__(self, "ncols", ncols)

    @property
    def nrows(self):
        return len(self.rows)

    def minors(self, r):
        R = self.ring
        for rs in itertools.combinations(range(self.nrows), r):
            for cs in itertools.combinations(range(self.ncols), r):
                yield ring_det(R, [[self.rows[i][j] for j in cs] for i in rs])


def ring_det(R, rows):
    n = len(rows)
    if n == 0:
        return R.one
    memo = {}

    def go(i, used):
        if i == n:
            return R.one
        if used in memo:
            return memo[used]
        acc = R.zero
        k = 0
        for j in range(n):
            if used >> j & 1:
                continue
            a = rows[i][j]
            if not R.is_zero(a):
                term = R.mul(a, go(i + 1, used | (1 << j)))
                acc = R.sub(acc, term) if k % 2 else R.add(acc, term)
            k += 1
        memo[used] = acc
        return acc

    return go(0, 0)


def _is_field(R):
    return isinstance(R, (PrimeField, GaloisField))


def residue_rank(f: WittMatrix, mode="mod-I"):
    """(rank, constant) of the reduction of f.

    rank is the largest r with a nonzero r-minor; the rank is constant when the
    r-minors generate the unit ideal (all (r+1)-minors vanish by maximality).
    """
    res = f.residue(mode)
    R = res.ring
    if _is_field(R):
        from ._kernels import rank as field_rank
        if res.nrows == 0 or res.ncols == 0:
            return 0, True
        return field_rank(R, [list(r) for r in res.rows]), True
    top = min(res.nrows, res.ncols)
    for r in range(top, 0, -1):
        minors = [m for m in res.minors(r) if not R.is_zero(m)]
        if minors:
            return r, bool(R.ideal_contains_one(minors))
    return 0, True


# -- chain-ring normal form ------------------------------------------------------

class _ModularChain:
    """Z/p^k as a chain ring."""

    def __init__(self, R: Modular):
        self.R = R
        self.k = R.k
        self.zero, self.one = 0, 1

    def add(self, a, b):
        return self.R.add(a, b)

    def sub(self, a, b):
        return self.R.sub(a, b)

    def mul(self, a, b):
        return self.R.mul(a, b)

    def valuation(self, a):
        return self.R.valuation(a)

    def unit_part(self, a):
        v = self.valuation(a)
        return (a // self.R.p ** v) % self.R.modulus

    def inv(self, a):
        return self.R.inv(a)

    def p_power(self, e):
        return self.R.from_int(self.R.p ** e)


class _WittChain:
    """W_m(F_q) as a chain ring: valuation is the index of the first nonzero coordinate."""

    def __init__(self, W: WittRing):
        if not hasattr(W.ring, "frob_inv"):
            raise ArgumentError("W_m needs a perfect finite base field to be a chain ring")
        self.W = W
        self.k = W.m
        self.zero, self.one = W.zero, W.one

    def add(self, a, b):
        return self.W.add(a, b)

    def sub(self, a, b):
        return self.W.sub(a, b)

    def mul(self, a, b):
        return self.W.mul(a, b)

    def valuation(self, a):
        return self.W.valuation(a)

    def unit_part(self, a):
        # p^v u = V^v(F^v u) in characteristic p, so u = F^{-v}(V^{-v} a)
        W = self.W
        v = W.valuation(a)
        shifted = tuple(a[v:]) + tuple([W.ring.zero] * v)
        for _ in range(v):
            shifted = W.frobenius_inverse(shifted)
        return shifted

    def inv(self, a):
        return self.W.inv(a)

    def p_power(self, e):
        return self.W.from_int(self.W.p ** e)


@dataclass
class NormalForm:
    exponents: list
    D: object
    P: object
    Q: object
    length: int


def _chain_for(f):
    if isinstance(f, WittMatrix):
        if isinstance(f.W.ring, Modular):
            raise ArgumentError("use integer matrices for Z/p^k")
        return _WittChain(f.W), [list(r) for r in f.rows], f.ncols
    raise ArgumentError("unsupported matrix type")


def chain_ring_normal_form(f, ring: Modular | None = None):
    """P f Q = diag(p^a_1, ..., p^a_r) with a_1 <= ... <= a_r.

    f is a WittMatrix over W_m(F_q), or a nested int list together with ring = Z/p^k.
    Returns exponents (k for zero diagonal entries), D, P, Q, and the length of the
    cokernel (sum of exponents plus k per surplus row).
    """
    if ring is not None:
        if not isinstance(ring, Modular):
            raise ArgumentError("integer matrices need a Z/p^k ring")
        C = _ModularChain(ring)
        A = [[ring.canon(x) for x in row] for row in f]
        ncols = len(A[0]) if A else 0
        wrap = lambda rows, nc: [list(r) for r in rows]
    else:
        C, A, ncols = _chain_for(f)
        W = f.W
        wrap = lambda rows, nc: WittMatrix(W, rows, nc)
    nrows = len(A)
    P = [[C.one if i == j else C.zero for j in range(nrows)] for i in range(nrows)]
    Q = [[C.one if i == j else C.zero for j in range(ncols)] for i in range(ncols)]
    exps = []
    for t in range(min(nrows, ncols)):
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                v = C.valuation(A[i][j])
                if v < C.k and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            exps.extend([C.k] * (min(nrows, ncols) - t))
            break
        v, i, j = best
        A[t], A[i] = A[i], A[t]
        P[t], P[i] = P[i], P[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        for row in Q:
            row[t], row[j] = row[j], row[t]
        u_inv = C.inv(C.unit_part(A[t][t]))
        A[t] = [C.mul(u_inv, a) for a in A[t]]
        P[t] = [C.mul(u_inv, a) for a in P[t]]
        for i2 in range(t + 1, nrows):
            b = A[i2][t]
            if C.valuation(b) < C.k:
                fct = C.mul(C.p_power(C.valuation(b) - v), C.unit_part(b))
                A[i2] = [C.sub(x, C.mul(fct, y)) for x, y in zip(A[i2], A[t])]
                P[i2] = [C.sub(x, C.mul(fct, y)) for x, y in zip(P[i2], P[t])]
        for j2 in range(t + 1, ncols):
            b = A[t][j2]
            if C.valuation(b) < C.k:
                fct = C.mul(C.p_power(C.valuation(b) - v), C.unit_part(b))
                for row in A:
                    row[j2] = C.sub(row[j2], C.mul(fct, row[t]))
                for row in Q:
                    row[j2] = C.sub(row[j2], C.mul(fct, row[t]))
        exps.append(v)
    length = sum(exps) + max(0, nrows - ncols) * C.k
    return NormalForm(exps, wrap(A, ncols), wrap(P, nrows), wrap(Q, ncols), length)


def int_matmul(R: Modular, A, B):
    return [[R.canon(sum(a * b for a, b in zip(row, col))) for col in zip(*B)] for row in A]


# -- duals and rank-one twists ---------------------------------------------------

@dataclass(frozen=True)
class RankOneTwist:
    """(I, iota) with I free of rank one over W_m and iota given by a unit v of W_n.

    u is an automorphism scalar of I used when twisting morphisms.
    """

    Wm: WittRing
    Wn: WittRing
    u: tuple
    v: tuple

    def __post_init__(self):
        if not self.Wm.is_unit(self.u) or not self.Wn.is_unit(self.v):
            raise DomainError("twist data must be units")

    @classmethod
    def trivial(cls, Wm, Wn):
        return cls(Wm, Wn, Wm.one, Wn.one)

    def compose(self, other):
        return RankOneTwist(self.Wm, self.Wn, self.Wm.mul(self.u, other.u),
                            self.Wn.mul(self.v, other.v))

    def dual(self):
        return RankOneTwist(self.Wm, self.Wn, self.Wm.inv(self.u), self.Wn.inv(self.v))

    def is_trivial(self):
        return self.u == self.Wm.one and self.v == self.Wn.one

    def to_json(self):
        R = self.Wm.ring
        return {"u": [R.elem_to_json(c) for c in self.u], "v": [R.elem_to_json(c) for c in self.v]}


def dual_and_twist(f: WittMatrix, twist: RankOneTwist | None = None):
    """Transpose in dual bases, then multiply by the twist scalar u."""
    out = f.transpose()
    if twist is not None:
        out = out.scale(twist.u)
    return out


def matrix_ops(op, *args):
    if op == "mul":
        return args[0] @ args[1]
    if op == "add":
        return args[0] + args[1]
    if op == "inverse":
        return args[0].inverse()
    if op == "transpose":
        return args[0].transpose()
    if op == "frobenius-twist":
        return args[0].frobenius_twist(*args[1:])
    raise ArgumentError(f"unknown matrix operation {op!r}")


# -- generators of finite matrix groups over W_m(F_q) ------------------------------

def field_basis(F):
    """F_p-basis of a finite field (codes of 1, t, t^2, ...)."""
    if isinstance(F, PrimeField):
        return [1]
    return [F.from_coeffs([0] * i + [1]) for i in range(F.degree)]


def primitive_element(F):
    q = F.q
    for a in range(1, q):
        x, order = a, 1
        while x != 1:
            x = F.mul(x, a)
            order += 1
        if order == q - 1:
            return a
    raise DomainError("no primitive element")


def unit_generators(W):
    """Generators of W_m(F_q)^*: [zeta] and 1 + V^j[t] for an F_p-basis t."""
    F = W.ring
    gens = []
    if F.q > 2:
        gens.append(W.teich(primitive_element(F)))
    for j in range(1, W.m):
        for t in field_basis(F):
            x = list(W.one)
            x[j] = t
            gens.append(tuple(x))
    return gens


def additive_generators(W, e=0):
    """Additive generators of p^e W_m(F_q): p^e [t] for an F_p-basis t."""
    if e >= W.m:
        return []
    pe = W.from_int(W.p ** e)
    return [W.mul(pe, W.teich(t)) for t in field_basis(W.ring)]


def bounded_group_generators(W, exps):
    """Generators of {g in GL_h(W_m(F_q)) : g_ab in p^{exps[a][b]} W} (diagonal exponents 0).

    Root subgroups 1 + x E_ab with x in p^{e_ab} W together with the diagonal torus.
    """
    h = len(exps)
    gens = []
    for a in range(h):
        for u in unit_generators(W):
            gens.append(WittMatrix.diagonal(W, [u if i == a else W.one for i in range(h)]))
    for a in range(h):
        for b in range(h):
            if a == b:
                continue
            for x in additive_generators(W, exps[a][b]):
                M = [list(r) for r in WittMatrix.identity(W, h).rows]
                M[a][b] = x
                gens.append(WittMatrix(W, M, h))
    return gens
