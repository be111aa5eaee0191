"""Truncated pairs in normal coordinates, the tilde functor, displays and Dieudonne modules.

A pair of type (h, d) over W_m(R) is stored as M = L + T with L spanned by the
first dL basis vectors and T by the remaining dT; M_1 = L + I T. Morphisms are
h' x h matrices whose lower-left (T' <- L) block has entries in I.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ArgumentError, DomainError, ValidationError, ResourceError
from .linmod import (WittMatrix, RankOneTwist, chain_ring_normal_form,
                     bounded_group_generators)
from .witt import WittRing, witt_ring
from ._orbits import orbit_of


def ring_matmul(R, A, B):
    out = []
    cols = list(zip(*B))
    for row in A:
        out.append([R.sum(R.mul(a, b) for a, b in zip(row, col)) for col in cols])
    return out


def swap_matrix(W, k1, k2):
    """Permutation matrix taking coordinates (x1, x2) with |x1| = k1 to (x2, x1)."""
    h = k1 + k2
    rows = [[W.zero] * h for _ in range(h)]
    for i in range(k2):
        rows[i][k1 + i] = W.one
    for i in range(k1):
        rows[k2 + i][i] = W.one
    return WittMatrix(W, rows, h)


@dataclass(frozen=True)
class NormalPair:
    W: WittRing
    dL: int
    dT: int

    def __post_init__(self):
        if self.dL < 0 or self.dT < 0:
            raise ArgumentError("ranks must be non-negative")

    @property
    def h(self):
        return self.dL + self.dT

    @property
    def d(self):
        return self.dL

    @property
    def m(self):
        return self.W.m

    @property
    def ring(self):
        return self.W.ring

    def dual(self):
        return NormalPair(self.W, self.dT, self.dL)

    def truncate(self, m):
        return NormalPair(witt_ring(self.ring, self.W.p, m), self.dL, self.dT)

    def base_change(self, hom, m=None):
        return NormalPair(witt_ring(hom.target, self.W.p, self.m if m is None else m), self.dL, self.dT)

    def c_exponents(self, other=None):
        """Valuation lower bounds for morphisms self -> other (1 on the T' <- L block)."""
        other = self if other is None else other
        return [[1 if (a >= other.dL and b < self.dL) else 0 for b in range(self.h)]
                for a in range(other.h)]

    def automorphism_generators(self):
        return bounded_group_generators(self.W, self.c_exponents())

    def to_json(self):
        return {"dL": self.dL, "dT": self.dT}


def pair_make(ring, p, m, dL, dT):
    return NormalPair(witt_ring(ring, p, m), dL, dT)


@dataclass(frozen=True)
class PairMorphism:
    source: NormalPair
    target: NormalPair
    matrix: WittMatrix

    def __post_init__(self):
        M = self.matrix
        if M.W != self.source.W or self.source.W != self.target.W:
            raise ArgumentError("pairs and matrix must live over the same W_m(R)")
        if M.shape != (self.target.h, self.source.h):
            raise ArgumentError(f"matrix shape {M.shape} does not match pairs")
        if not self.c_block.in_augmentation():
            raise ValidationError("lower-left block is not in I", {"block": "c"})

    @property
    def a(self):
        return self.matrix.block(0, self.target.dL, 0, self.source.dL)

    @property
    def b(self):
        return self.matrix.block(0, self.target.dL, self.source.dL, self.source.h)

    @property
    def c_block(self):
        return self.matrix.block(self.target.dL, self.target.h, 0, self.source.dL)

    c = c_block

    @property
    def d(self):
        return self.matrix.block(self.target.dL, self.target.h, self.source.dL, self.source.h)

    @classmethod
    def identity(cls, pair):
        return cls(pair, pair, WittMatrix.identity(pair.W, pair.h))

    @classmethod
    def from_blocks(cls, source, target, a, b, c, d):
        return cls(source, target, WittMatrix.blocks(source.W, [[a, b], [c, d]]))

    @classmethod
    def random(cls, source, target, rng):
        W = source.W
        ex = source.c_exponents(target)
        rows = [[W.random(rng, ideal=bool(ex[i][j])) for j in range(source.h)]
                for i in range(target.h)]
        return cls(source, target, WittMatrix(W, rows, source.h))

    def __matmul__(self, f):
        return compose(self, f)

    def __eq__(self, other):
        return (isinstance(other, PairMorphism) and self.source == other.source
                and self.target == other.target and self.matrix == other.matrix)

    def __hash__(self):
        return hash(self.matrix)

    def dual(self):
        """f^v: target^v -> source^v, the transpose written in (T^v, L^v) coordinates."""
        W = self.source.W
        S_out = swap_matrix(W, self.source.dL, self.source.dT)
        S_in = swap_matrix(W, self.target.dT, self.target.dL)
        return PairMorphism(self.target.dual(), self.source.dual(),
                            S_out @ self.matrix.transpose() @ S_in)

    def scale(self, u):
        return PairMorphism(self.source, self.target, self.matrix.scale(u))

    def is_invertible(self):
        try:
            self.inverse()
        except (DomainError, ValidationError):
            return False
        return True

    def inverse(self):
        return PairMorphism(self.target, self.source, self.matrix.inverse())

    def truncate(self, m):
        return PairMorphism(self.source.truncate(m), self.target.truncate(m), self.matrix.truncate(m))

    def base_change(self, hom):
        M = self.matrix.base_change(hom)
        return PairMorphism(self.source.base_change(hom), self.target.base_change(hom), M)


def compose(g: PairMorphism, f: PairMorphism):
    if f.target != g.source:
        raise ArgumentError("morphisms are not composable")
    return PairMorphism(f.source, g.target, g.matrix @ f.matrix)


def morphism_compose(g, f):
    return compose(g, f)


def _p_times(W, x):
    return W.mul(W.from_int(W.p), x)


def tilde(f: PairMorphism, n=None):
    """(a^s, p b^s; c^{s,div}, d^s) over W_n, n <= m-1 (default m-1)."""
    W = f.source.W
    n = W.m - 1 if n is None else n
    if not 0 <= n <= W.m - 1:
        raise ArgumentError("tilde lands in W_n with n <= m-1")
    Wn = witt_ring(W.ring, W.p, n)
    src, tgt = f.source, f.target
    rows = []
    for i in range(tgt.h):
        row = []
        for j in range(src.h):
            x = f.matrix.rows[i][j]
            if i >= tgt.dL and j < src.dL:
                row.append(W.divided_frobenius(x, n))
            else:
                y = W.frobenius(x, n)
                if i < tgt.dL and j >= src.dL:
                    y = _p_times(Wn, y)
                row.append(y)
        rows.append(row)
    return WittMatrix(Wn, rows, src.h)


def tilde_dual_square(f: PairMorphism, n=None):
    """tilde(f^v) against tilde(f)^v, both written in (T^v, L^v) coordinates."""
    lhs = tilde(f.dual(), n)
    T = tilde(f, n)
    S_out = swap_matrix(T.W, f.source.dL, f.source.dT)
    S_in = swap_matrix(T.W, f.target.dT, f.target.dL)
    return lhs == S_out @ T.transpose() @ S_in


def tilde_twist_square(f: PairMorphism, u, n=None):
    """Twisting f by a unit u of the trivialized I: tilde(u f) = sigma(u) tilde(f)."""
    W = f.source.W
    n = W.m - 1 if n is None else n
    return tilde(f.scale(u), n) == tilde(f, n).scale(twist_scalar_tilde(W, u, n))


def incl_and_multp(pair: NormalPair, n=None):
    """(iota, pi) over W_n: iota = diag(1_L, p_T) and pi = diag(p_L, 1_T)."""
    n = pair.m - 1 if n is None else n
    Wn = witt_ring(pair.ring, pair.W.p, n)
    p = Wn.from_int(Wn.p)
    iota = WittMatrix.diagonal(Wn, [Wn.one] * pair.dL + [p] * pair.dT)
    pi = WittMatrix.diagonal(Wn, [p] * pair.dL + [Wn.one] * pair.dT)
    return iota, pi


def twist_scalar_tilde(W, u, n):
    """The image of a twist scalar u of I under I -> W_n (x)_sigma I."""
    return W.frobenius(u, n)


@dataclass(frozen=True)
class TruncatedDisplay:
    pair: NormalPair
    psi: WittMatrix

    def __post_init__(self):
        if self.psi.shape != (self.pair.h, self.pair.h):
            raise ArgumentError("psi must be h x h")
        if self.psi.W.ring != self.pair.ring or self.psi.W.m > self.pair.m - 1:
            raise ArgumentError("psi must live over W_n(R) with n <= m-1")
        if self.pair.h and not self.psi.is_invertible():
            raise ValidationError("psi is not invertible", {"check": "psi-invertible"})

    @property
    def n(self):
        return self.psi.W.m

    @property
    def m(self):
        return self.pair.m

    @property
    def h(self):
        return self.pair.h

    @property
    def d(self):
        return self.pair.d

    def frobenius(self):
        _, pi = incl_and_multp(self.pair, self.n)
        return self.psi @ pi

    def f_nilpotent(self):
        return display_frobenius(self)[1]

    def to_json(self):
        return {"pair": self.pair.to_json(), "psi": self.psi.to_json(),
                "ring": self.pair.ring.to_json(), "p": self.pair.W.p,
                "m": self.m, "n": self.n}


def display_make(pair: NormalPair, psi):
    if not isinstance(psi, WittMatrix):
        n = pair.m - 1
        psi = WittMatrix.from_entries(witt_ring(pair.ring, pair.W.p, n), psi, pair.h)
    return TruncatedDisplay(pair, psi)


def display_frobenius(D: TruncatedDisplay):
    """(F, f_nilpotent) with F = Psi pi over W_n.

    Nilpotence is decided on Phi = F mod (I, p) over R/pR: the product
    Phi Phi^(p) ... Phi^(p^{N-1}) is tested for N up to h * m.
    """
    F = D.frobenius()
    h = D.h
    if h == 0:
        return F, True
    if D.n == 0:
        raise ArgumentError("Frobenius needs n >= 1")
    res = F.residue("mod-p")
    R = res.ring
    phi = [list(r) for r in res.rows]
    acc = phi
    twisted = phi
    budget = h * max(D.m, 1)
    for _ in range(budget):
        if all(R.is_zero(x) for r in acc for x in r):
            return F, True
        twisted = [[R.frob(x) for x in r] for r in twisted]
        acc = ring_matmul(R, acc, twisted)
    return F, all(R.is_zero(x) for r in acc for x in r)


def display_dual(D: TruncatedDisplay):
    """(M^v, M_1^*, Psi^{v,-1}) in the normal decomposition (T^v, L^v)."""
    Wn = D.psi.W
    S_in = swap_matrix(Wn, D.pair.dT, D.pair.dL)
    S_out = swap_matrix(Wn, D.pair.dL, D.pair.dT)
    psi = S_out @ D.psi.transpose().inverse() @ S_in
    return TruncatedDisplay(D.pair.dual(), psi)


def display_twist(T: RankOneTwist, D: TruncatedDisplay):
    if T.Wn != D.psi.W or T.Wm != D.pair.W:
        raise ArgumentError("twist and display live over different rings")
    return TruncatedDisplay(D.pair, D.psi.scale(T.v))


def base_change_truncate(D: TruncatedDisplay, hom=None, m=None, n=None):
    m = D.m if m is None else m
    n = D.n if n is None else n
    if m > D.m or n > D.n or n > m - 1 or n < 0:
        raise ArgumentError(f"cannot truncate ({D.m},{D.n}) to ({m},{n})")
    pair = D.pair.truncate(m)
    psi = D.psi.truncate(n)
    if hom is not None:
        pair = pair.base_change(hom)
        psi = psi.base_change(hom)
    return TruncatedDisplay(pair, psi)


def morphism_intertwines(f: PairMorphism, D1: TruncatedDisplay, D2: TruncatedDisplay):
    """f is a morphism of displays iff f Psi_1 = Psi_2 tilde(f) over W_n."""
    n = D1.n
    return f.matrix.truncate(n) @ D1.psi == D2.psi @ tilde(f, n)


def act_on_psi(k: PairMorphism, psi: WittMatrix):
    """The sigma-conjugation k . Psi = k^(n) Psi tilde(k)^{-1}."""
    n = psi.W.m
    return k.matrix.truncate(n) @ psi @ tilde(k, n).inverse()


def isomorphism_search(D1: TruncatedDisplay, D2: TruncatedDisplay, cap=200000):
    """'isomorphic', 'not-isomorphic' or 'undecided' (orbit larger than cap)."""
    if (D1.pair != D2.pair) or D1.psi.W != D2.psi.W:
        return "not-isomorphic"
    gens = [PairMorphism(D1.pair, D1.pair, g) for g in D1.pair.automorphism_generators()]
    tildes = {}

    def act(g, psi):
        key = id(g)
        if key not in tildes:
            tildes[key] = (g.matrix.truncate(psi.W.m), tilde(g, psi.W.m).inverse())
        left, right = tildes[key]
        return left @ psi @ right

    try:
        orb = orbit_of(D1.psi, gens, act, cap)
    except ResourceError:
        return "undecided"
    return "isomorphic" if D2.psi in orb else "not-isomorphic"


def canonical_psi(D: TruncatedDisplay, cap=200000):
    """Lexicographically least Psi (by coordinate tuples) in the isomorphism class."""
    gens = [PairMorphism(D.pair, D.pair, g) for g in D.pair.automorphism_generators()]
    orb = orbit_of(D.psi, gens, lambda g, psi: act_on_psi(g, psi), cap)
    return min(orb, key=lambda M: M.rows)


# -- Dieudonne modules over finite fields ------------------------------------------------

@dataclass
class DieudonneModule:
    """(M, F) over W_N(F_q): F is the matrix of M^sigma -> M in a basis of M."""

    F: WittMatrix

    @property
    def W(self):
        return self.F.W

    @property
    def h(self):
        return self.F.nrows

    def type(self):
        nf = chain_ring_normal_form(self.F)
        if any(e > 1 for e in nf.exponents):
            raise ValidationError("p M is not contained in F(M^sigma)",
                                  {"exponents": nf.exponents})
        return self.h, sum(nf.exponents)

    def to_json(self):
        return {"ring": self.W.ring.to_json(), "p": self.W.p, "N": self.W.m,
                "F": self.F.to_json()}


@dataclass
class DieudonneToDisplay:
    display: TruncatedDisplay
    k: WittMatrix          # new basis of M in old coordinates
    M1: list = field(default_factory=list)  # generators of M_1 in old coordinates

    def check(self, F: WittMatrix):
        """F' = k^{-1} F k^sigma, read at the precision of Psi."""
        n = self.display.n
        lhs = (self.k.inverse() @ F @ self.k.frobenius_endo()).truncate(n)
        return lhs == self.display.frobenius()


def dieudonne_from_display(D: TruncatedDisplay):
    if not hasattr(D.pair.ring, "frob_inv"):
        raise ArgumentError("Dieudonne modules need a finite field base")
    return DieudonneModule(D.frobenius())


def display_from_dieudonne(mod: DieudonneModule):
    """M_1 = p F^{-1}(M)^{sigma^{-1}} and Psi = p^{-1} F on it.

    With F = U diag(p^d, 1^{h-d}) V and k = (V^{-1})^{sigma^{-1}}, the basis k of M
    is normal for M_1 and Psi = k^{-1} U. The pair lives over W_N and Psi over W_{N-1}.
    """
    F = mod.F
    W = F.W
    if not hasattr(W.ring, "frob_inv"):
        raise ArgumentError("Dieudonne modules need a finite field base")
    if W.m < 2:
        raise ArgumentError("working precision must be at least 2")
    h = F.nrows
    nf = chain_ring_normal_form(F)
    exps = nf.exponents
    if any(e > 1 for e in exps):
        raise ValidationError("p M is not contained in F(M^sigma)", {"exponents": exps})
    d = sum(exps)
    # P F Q = diag(1^{h-d}, p^d); reorder to diag(p^d, 1^{h-d})
    order = list(range(h - d, h)) + list(range(h - d))
    perm = WittMatrix(W, [[W.one if order[i] == j else W.zero for j in range(h)] for i in range(h)], h)
    U = nf.P.inverse() @ perm.transpose()
    V = perm @ nf.Q.inverse()
    k = V.inverse().frobenius_inverse()
    psi = (k.inverse() @ U).truncate(W.m - 1)
    pair = NormalPair(W, d, h - d)
    D = TruncatedDisplay(pair, psi)
    p = W.from_int(W.p)
    cols = list(zip(*k.rows))
    M1 = [list(c) if j < d else [W.mul(p, x) for x in c] for j, c in enumerate(cols)]
    return DieudonneToDisplay(D, k, M1)


@dataclass
class RoundtripReport:
    direction: str
    ok: bool
    h: int
    d: int
    witness: WittMatrix


def dieudonne_roundtrip(direction, obj):
    """'F' : (M, F) -> display -> (M, F'), witness k with F' = k^{-1} F k^sigma.
    'display' : display -> (M, F) -> display', witness g with g Psi = Psi' tilde(g).
    """
    if direction == "F":
        mod = obj if isinstance(obj, DieudonneModule) else DieudonneModule(obj)
        res = display_from_dieudonne(mod)
        h, d = mod.type()
        ok = res.check(mod.F) and (res.display.h, res.display.d) == (h, d)
        return RoundtripReport("F", ok, h, d, res.k)
    if direction == "display":
        D = obj
        mod = dieudonne_from_display(D)
        res = display_from_dieudonne(mod)
        D2 = res.display
        n = D2.n
        g = res.k.inverse()
        try:
            gm = PairMorphism(D.pair.truncate(D2.m), D2.pair, g)
        except ValidationError:
            return RoundtripReport("display", False, D.h, D.d, g)
        ok = (gm.matrix.truncate(n) @ D.psi.truncate(n) == D2.psi @ tilde(gm, n)
              and (D2.h, D2.d) == (D.h, D.d))
        return RoundtripReport("display", ok, D.h, D.d, g)
    raise ArgumentError(f"unknown direction {direction!r}")


def random_frobenius(W, h, d, rng):
    """A @ diag(p^d, 1^{h-d}) @ B with A, B random invertible over W_N(F_q)."""
    def rand_gl():
        while True:
            M = WittMatrix(W, [[W.random(rng) for _ in range(h)] for _ in range(h)], h)
            if M.is_invertible():
                return M
    p = W.from_int(W.p)
    D = WittMatrix.diagonal(W, [p] * d + [W.one] * (h - d))
    return rand_gl() @ D @ rand_gl()


# -- Lau-Zink truncated morphisms (characteristic p) -------------------------------------

@dataclass(frozen=True)
class LauZinkMorphism:
    """Blocks a, b, d over W_n and c with entries in I_{n+1} (stored in W_{n+1}).

    Products with c use arbitrary lifts to W_{n+1}; this is well defined since
    V^n(R) . I_{n+1} = 0.
    """

    Wn: WittRing
    dims: tuple          # (dL, dT, dL', dT')
    a: tuple
    b: tuple
    c: tuple
    d: tuple

    def __post_init__(self):
        if not self.Wn.char_p:
            raise ArgumentError("Lau-Zink morphisms are implemented in characteristic p only")
        W1 = self.W_lift
        for row in self.c:
            for x in row:
                if not W1.in_augmentation(x):
                    raise ValidationError("c-block is not in I_{n+1}")

    @property
    def W_lift(self):
        return witt_ring(self.Wn.ring, self.Wn.p, self.Wn.m + 1)

    def _lift(self, x):
        return tuple(x) + (self.Wn.ring.zero,)

    @classmethod
    def from_entries(cls, Wn, a, b, c, d):
        W1 = witt_ring(Wn.ring, Wn.p, Wn.m + 1)
        conv = lambda M, WW: tuple(tuple(WW.coerce(x) if not isinstance(x, int) else WW.from_int(x)
                                         for x in r) for r in M)
        a, b, d = conv(a, Wn), conv(b, Wn), conv(d, Wn)
        c = conv(c, W1)
        dims = (len(a[0]) if a else 0, len(d[0]) if d else 0, len(a), len(d))
        return cls(Wn, dims, a, b, c, d)

    def _mm(self, W, A, B):
        out = []
        for row in A:
            out.append(tuple(W.sum(W.mul(x, y) for x, y in zip(row, col)) for col in zip(*B)))
        return tuple(out)

    def compose_after(self, f: "LauZinkMorphism"):
        """self o f."""
        Wn, W1 = self.Wn, self.W_lift
        lift = lambda M: tuple(tuple(self._lift(x) for x in r) for r in M)
        trunc = lambda M: tuple(tuple(x[:Wn.m] for x in r) for r in M)
        add_n = lambda A, B: tuple(tuple(Wn.add(x, y) for x, y in zip(r, s)) for r, s in zip(A, B))
        add_1 = lambda A, B: tuple(tuple(W1.add(x, y) for x, y in zip(r, s)) for r, s in zip(A, B))
        g = self
        a = add_n(self._mm(Wn, g.a, f.a), trunc(self._mm(W1, lift(g.b), f.c)))
        b = add_n(self._mm(Wn, g.a, f.b), self._mm(Wn, g.b, f.d))
        c = add_1(self._mm(W1, g.c, lift(f.a)), self._mm(W1, lift(g.d), f.c))
        d = add_n(trunc(self._mm(W1, g.c, lift(f.b))), self._mm(Wn, g.d, f.d))
        return LauZinkMorphism(Wn, (f.dims[0], f.dims[1], g.dims[2], g.dims[3]), a, b, c, d)

    def tilde(self):
        Wn, W1 = self.Wn, self.W_lift
        n = Wn.m
        p = Wn.from_int(Wn.p)
        sig = lambda x: W1.frobenius(self._lift(x), n)
        a = [[sig(x) for x in r] for r in self.a]
        b = [[Wn.mul(p, sig(x)) for x in r] for r in self.b]
        c = [[W1.divided_frobenius(x, n) for x in r] for r in self.c]
        d = [[sig(x) for x in r] for r in self.d]
        rows = [ra + rb for ra, rb in zip(a, b)] + [rc + rd for rc, rd in zip(c, d)]
        return WittMatrix(Wn, rows, self.dims[0] + self.dims[1])

    def __eq__(self, other):
        return (isinstance(other, LauZinkMorphism) and self.Wn == other.Wn
                and (self.a, self.b, self.c, self.d) == (other.a, other.b, other.c, other.d))

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    @classmethod
    def scalar(cls, Wn, h_L, h_T, s):
        """Multiplication by an integer s on the standard pair of ranks (h_L, h_T)."""
        W1 = witt_ring(Wn.ring, Wn.p, Wn.m + 1)
        diag = lambda W, k, v: tuple(tuple(v if i == j else W.zero for j in range(k)) for i in range(k))
        zero = lambda W, r, c: tuple(tuple(W.zero for _ in range(c)) for _ in range(r))
        return cls(Wn, (h_L, h_T, h_L, h_T), diag(Wn, h_L, Wn.from_int(s)), zero(Wn, h_L, h_T),
                   zero(W1, h_T, h_L), diag(Wn, h_T, Wn.from_int(s)))
