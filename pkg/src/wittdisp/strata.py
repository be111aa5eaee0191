"""Local model points over F_q, parahoric orbits, admissible sets, display classes and EKOR counts.

Lattice conventions. Points of the local model are tuples (C_r) of d-dimensional
subspaces of Lambda_r / p = F_q^h, one per representative r of J, on the
standard chain (rho diagonal with zeros at the positions in (i, j]).

Affine permutations act on the basis f_l (l in Z) with p f_l = f_{l-h}; the
standard chain is Lambda_i = <f_l : l <= i>, increasing in i.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import ArgumentError, ResourceError, ValidationError
from .rings import finite_field, Modular
from .witt import witt_ring
from .linmod import (WittMatrix, bounded_group_generators, unit_generators,
                     additive_generators, chain_ring_normal_form, field_basis, primitive_element)
from .displays import (NormalPair, PairMorphism, TruncatedDisplay, act_on_psi, tilde,
                       display_frobenius)
from ._orbits import partition, orbit_of
from .chains import (IndexSetJ, _p_edges, lagrangian_torus_points, torus_points,
                     standard_chain_of_displays, standard_polarized_chain, standard_symplectic_form,
                     polarized_validate, PolarizedChain, _perm_matrix)
from .linmod import RankOneTwist
from dataclasses import replace

DEFAULT_CAP = 10 ** 7


def _as_J(h, J):
    return J if isinstance(J, IndexSetJ) else IndexSetJ.parse(h, J)


def _field(q):
    return q if hasattr(q, "q") else finite_field(q)


# -- subspaces over F_q ---------------------------------------------------------------

def canonical_subspace(F, rows, h):
    """Reduced row echelon form as a tuple of tuples (zero rows dropped)."""
    M = np.asarray(rows, dtype=np.int64).reshape(-1, h)
    if M.shape[0] == 0:
        return ()
    R, rank, _ = _kernels.rref(F, M)
    return tuple(tuple(int(x) for x in R[r]) for r in range(rank))


def gaussian_binomial(h, d, q):
    num, den = 1, 1
    for i in range(d):
        num *= q ** (h - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def grassmannian(F, h, d):
    """All d-dimensional subspaces of F^h in reduced row echelon form, sorted."""
    q = F.q
    out = []
    for piv in itertools.combinations(range(h), d):
        free = [(r, c) for r in range(d) for c in range(h) if c > piv[r] and c not in piv]
        for vals in itertools.product(range(q), repeat=len(free)):
            M = [[0] * h for _ in range(d)]
            for r, c in enumerate(piv):
                M[r][c] = 1
            for (r, c), v in zip(free, vals):
                M[r][c] = v
            out.append(tuple(tuple(row) for row in M))
    out.sort()
    return out


def _contains(F, A, B, h):
    """Is the row space of A inside the row space of B?"""
    if not A:
        return True
    stack = np.array(list(B) + list(A), dtype=np.int64).reshape(-1, h)
    return _kernels.rank(F, stack) == len(B)


def _apply(F, M, C, h):
    """Row space of {M v : v in C} (M an h x h int array)."""
    if not C:
        return ()
    V = np.array(C, dtype=np.int64).reshape(-1, h)
    return canonical_subspace(F, _kernels.matmul(F, V, M.T.copy()), h)


def _form_mod_p(F, g):
    h = 2 * g
    neg1 = int(_kernels.field_tables(F)[2][1])
    J = np.zeros((h, h), dtype=np.int64)
    for k in range(g):
        J[k, h - 1 - k] = 1
        J[h - 1 - k, k] = neg1
    return J


def _perp(F, Jf, C, h):
    """{x : x^T J y = 0 for y in C}."""
    if not C:
        return canonical_subspace(F, np.eye(h, dtype=np.int64), h)
    Y = np.array(C, dtype=np.int64).reshape(-1, h)
    A = _kernels.matmul(F, Y, Jf.T.copy())
    return canonical_subspace(F, _kernels.nullspace(F, A), h)


def _rho_bar(J, h):
    """Mod-p consecutive maps of the standard chain (diagonal 0/1 arrays)."""
    pe = _p_edges(J, h)
    return [np.diag([0 if pe[k] == t else 1 for k in range(1, h + 1)]).astype(np.int64)
            for t in range(J.k)]


# -- local model ----------------------------------------------------------------------

@dataclass(frozen=True)
class LocalModelPoint:
    q: int
    h: int
    d: int
    J: tuple
    C: tuple

    def to_json(self):
        return {"q": self.q, "h": self.h, "d": self.d, "J": list(self.J),
                "C": [[list(r) for r in c] for c in self.C]}


def localmodel_enumerate(h, d, J, q, group="GL", cap=DEFAULT_CAP):
    """All tuples (C_r) with rho(C_i) in C_j, theta(C_i) = C_{i+h} and, for GSp,
    C_{-i} the orthogonal of C_i. Returns sorted tuples of echelon forms."""
    F = _field(q)
    J = _as_J(h, J)
    group = group.upper()
    if group == "GSP":
        if h % 2 or 2 * d != h:
            raise ArgumentError("GSp needs h = 2g and d = g")
        if not J.is_symmetric():
            raise ArgumentError("GSp needs -J = J")
    elif group != "GL":
        raise ArgumentError(f"unknown group {group}")
    k = J.k
    minus = [J.split(-r)[0] for r in J.reps] if group == "GSP" else list(range(k))
    free = [t for t in range(k) if group == "GL" or minus[t] >= t]
    size = gaussian_binomial(h, d, F.q) ** len(free)
    if size > cap:
        raise ResourceError(f"local model enumeration needs {size} candidates (cap {cap})")
    grass = grassmannian(F, h, d)
    rho = _rho_bar(J, h)
    Jf = _form_mod_p(F, h // 2) if group == "GSP" else None
    out = []

    def edge_ok(t, Ci, Cj):
        return _contains(F, _apply(F, rho[t], Ci, h), Cj, h)

    def extend(prefix):
        t = len(prefix)
        if t == k:
            if edge_ok(k - 1, prefix[-1], prefix[0]):
                out.append(tuple(prefix))
            return
        if group == "GSP" and minus[t] < t:
            cands = [_perp(F, Jf, prefix[minus[t]], h)]
        else:
            cands = grass
        for C in cands:
            if group == "GSP" and minus[t] == t and _perp(F, Jf, C, h) != C:
                continue
            if t and not edge_ok(t - 1, prefix[-1], C):
                continue
            extend(prefix + [C])

    extend([])
    out.sort()
    return out


def torus_subspaces(S, h):
    return tuple(tuple(tuple(1 if c == k - 1 else 0 for c in range(h)) for k in sorted(s)) for s in S)


# -- parahoric groups -----------------------------------------------------------------

def parahoric_exponents(h, J):
    """e_ab in {-1, 0, 1}: the parahoric for J has g_ab in p^{e_ab} W in Lambda_0-coordinates.

    With s_r(a, b) = [a < r] - [b < r] (0-based) the chain coordinate at r scales g_ab by
    p^{s_r}, so e_ab = max_r -s_r(a, b). Exponent -1 occurs only when 0 is not in J.
    """
    return [[0 if a == b else max(-((a < r) - (b < r)) for r in J.reps) for b in range(h)]
            for a in range(h)]


def gsp_generators(W, g, exps):
    """Torus, similitude and root elements of GSp_{2g} with g_ab in p^{exps[a][b]}."""
    h = 2 * g
    sgn = lambda k: 1 if k < g else -1           # 0-based positions
    prime = lambda k: h - 1 - k
    gens = []
    units = unit_generators(W)
    for a in range(g):
        for u in units:
            gens.append(WittMatrix.diagonal(W, [u if i == a else W.inv(u) if i == prime(a) else W.one
                                                for i in range(h)]))
    for u in units:
        gens.append(WittMatrix.diagonal(W, [W.one] * g + [u] * g))
    seen = set()
    for a in range(h):
        for b in range(h):
            if a == b:
                continue
            e = max(exps[a][b], exps[prime(b)][prime(a)])
            for x in additive_generators(W, e):
                rows = [list(r) for r in WittMatrix.identity(W, h).rows]
                rows[a][b] = W.add(rows[a][b], x)
                if b != prime(a):
                    y = x if sgn(a) * sgn(b) < 0 else W.neg(x)
                    rows[prime(b)][prime(a)] = W.add(rows[prime(b)][prime(a)], y)
                M = WittMatrix(W, rows, h)
                if M not in seen:
                    seen.add(M)
                    gens.append(M)
    return gens


def similitude_factor(M, Jform):
    """u with M^T J M = u J, or None."""
    P = M.transpose() @ Jform @ M
    W = M.W
    u = W.mul(P.rows[0][-1], W.inv(Jform.rows[0][-1]))
    return u if P == Jform.scale(u) else None


def parahoric_generators(h, J, W, group="GL"):
    """Integral generators over W; only for J containing 0, where every exponent is >= 0."""
    if 0 not in J.reps:
        raise ArgumentError("integral parahoric generators need 0 in J")
    exps = parahoric_exponents(h, J)
    if group.upper() == "GSP":
        return gsp_generators(W, h // 2, exps)
    return bounded_group_generators(W, exps)


def _div_p(W, x, m):
    """x / p truncated to W_m, for x in p W_{m+1} over a perfect field of char p."""
    Wm = witt_ring(W.ring, W.p, m)
    if x[0] != W.ring.zero:
        raise ArgumentError("not divisible by p")
    return Wm.frobenius_inverse(tuple(x[1:m + 1]))


def chain_coordinates(g, J, m):
    """(D_r^{-1} g D_r) mod p^m for each representative r, from g over W_{m+1}."""
    W = g.W
    Wm = witt_ring(W.ring, W.p, m)
    h = g.nrows
    p = Wm.from_int(W.p)
    out = []
    for r in J.reps:
        rows = []
        for a in range(h):
            row = []
            for b in range(h):
                s = (a + 1 <= r) - (b + 1 <= r)
                x = g.rows[a][b]
                if s == 0:
                    row.append(x[:m])
                elif s == 1:
                    row.append(Wm.mul(p, x[:m]))
                else:
                    row.append(_div_p(W, x, m))
            rows.append(row)
        out.append(WittMatrix(Wm, rows, h))
    return out


def _mod_p_images(gens, J):
    out = []
    for g in gens:
        mats = chain_coordinates(g, J, 1)
        out.append(tuple(np.array([[x[0] for x in row] for row in M.rows], dtype=np.int64) for M in mats))
    return out


def parahoric_mod_p_images(F, h, J, group="GL"):
    """Images in prod_r GL(Lambda_r / p) of generators of the parahoric for J.

    The parahoric is generated by the integral torus and affine root elements
    1 + p^e [t] E_ab (paired with E_b'a' for GSp), e = e_ab. In chain coordinate r such an
    element reduces to 1 + t E_ab when e + s_r(a, b) = 0 and to 1 otherwise, so p^{-1}
    entries never have to be represented.
    """
    J = _as_J(h, J)
    exps = parahoric_exponents(h, J)
    gsp = group.upper() == "GSP"
    g = h // 2
    prime = lambda k: h - 1 - k
    sgn = lambda k: 1 if k < g else -1

    def diag(vals):
        return tuple(np.diag(vals).astype(np.int64) for _ in J.reps)

    gens = []
    if F.q > 2:
        u = primitive_element(F)
        uinv = F.inv(u)
        if gsp:
            for a in range(g):
                gens.append(diag([u if i == a else uinv if i == prime(a) else 1 for i in range(h)]))
            gens.append(diag([1] * g + [u] * g))
        else:
            for a in range(h):
                gens.append(diag([u if i == a else 1 for i in range(h)]))
    seen = set()
    for a in range(h):
        for b in range(h):
            if a == b:
                continue
            entries = [(a, b, 1)]
            if gsp and b != prime(a):
                entries.append((prime(b), prime(a), 1 if sgn(a) * sgn(b) < 0 else -1))
            for t in field_basis(F):
                mats = []
                for r in J.reps:
                    M = np.eye(h, dtype=np.int64)
                    for x, y, sign in entries:
                        if exps[x][y] + (x < r) - (y < r) == 0:
                            M[x, y] = t if sign == 1 else F.neg(t)
                    mats.append(M)
                key = tuple(M.tobytes() for M in mats)
                if key not in seen:
                    seen.add(key)
                    gens.append(tuple(mats))
    return gens


@dataclass
class OrbitReport:
    total: int
    count: int
    sizes: list
    reps: list
    orbits: list = field(default_factory=list, repr=False)

    def to_json(self):
        return {"points": self.total, "orbit_count": self.count,
                "orbits": [{"size": s, "rep": [[list(r) for r in c] for c in rep]}
                           for s, rep in zip(self.sizes, self.reps)]}


def parahoric_orbits(points, q, h, J, group="GL", workers=1):
    """Orbits of the parahoric on local model points, acting through its mod-p chain images."""
    F = _field(q)
    J = _as_J(h, J)
    images = parahoric_mod_p_images(F, h, J, group)

    def act(gi, pt):
        return tuple(_apply(F, gi[t], C, h) for t, C in enumerate(pt))

    orbits = partition(points, images, act, workers=workers)
    return OrbitReport(len(points), len(orbits), [len(o) for o in orbits], [o[0] for o in orbits], orbits)


# -- affine permutations --------------------------------------------------------------

@dataclass(frozen=True)
class AffinePermutation:
    h: int
    window: tuple

    def __post_init__(self):
        w = tuple(int(x) for x in self.window)
        object.__setattr__(self, "window", w)
        if len(w) != self.h or sorted(x % self.h for x in w) != list(range(self.h)):
            raise ArgumentError("window is not an affine permutation")

    def __call__(self, i):
        a, r = divmod(i - 1, self.h)
        return self.window[r] + a * self.h

    def similitude(self):
        """c with sigma(i) + sigma(1 - i) = 1 - h c for all i, or None."""
        vals = {self(i) + self(1 - i) for i in range(1, self.h + 1)}
        if len(vals) != 1:
            return None
        v = vals.pop()
        return None if (1 - v) % self.h else (1 - v) // self.h

    def conjugate_shift(self, s):
        """tau_s w tau_s^{-1} with tau_s(i) = i + s."""
        return AffinePermutation(self.h, tuple(self(i - s) + s for i in range(1, self.h + 1)))

    def to_json(self):
        return list(self.window)


def translation(h, mu):
    """t^mu in this convention: sigma(k) = k - h mu_k."""
    return AffinePermutation(h, tuple(k + 1 - h * mu[k] for k in range(h)))


def is_admissible(w: AffinePermutation, d, J, group="GL"):
    """p Lambda_i <= w Lambda_i <= Lambda_i of index d for all i in J, combinatorially.

    With Lambda_i = <f_l : l <= i>: containment is sigma(j) <= i for j <= i, the
    index is #{j > i : sigma(j) <= i}, and p Lambda_i <= w Lambda_i is sigma(j) > i - h for j > i.
    """
    h = w.h
    J = _as_J(h, J)
    if group.upper() == "GSP" and w.similitude() != 1:
        return False
    D = max(0, max(k - w(k) for k in range(1, h + 1)))
    for i in J.reps:
        if max(w(j) for j in range(i - h + 1, i + 1)) > i:
            return False
        if min(w(j) for j in range(i + 1, i + h + 1)) <= i - h:
            return False
        if sum(1 for j in range(i + 1, i + D + 1) if w(j) <= i) != d:
            return False
    return True


def _monomial(w: AffinePermutation, p):
    """Matrix of w on e_1..e_h, where f_{k + a h} = p^{-a} e_k."""
    h = w.h
    M = [[Fraction(0)] * h for _ in range(h)]
    for k in range(1, h + 1):
        a, r = divmod(w(k) - 1, h)
        M[r][k - 1] = Fraction(p) ** (-a)
    return M


def _fmul(A, B):
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in zip(*B)] for row in A]


def is_admissible_lattice(w: AffinePermutation, d, J, p, group="GL"):
    """Same test through explicit matrices: D_i^{-1} w D_i must be integral and its
    Smith form over Z/p^2 must be diag(1.., p..) with d entries p; for GSp the matrix
    must be a similitude with multiplier p for the standard form up to signs."""
    h = w.h
    J = _as_J(h, J)
    M = _monomial(w, p)
    R = Modular(p, 2)
    for i in J.reps:
        D = [[Fraction(p) ** (-1 if (a == b and a + 1 <= i) else 0) if a == b else Fraction(0)
              for b in range(h)] for a in range(h)]
        Dinv = [[1 / x if x else Fraction(0) for x in row] for row in D]
        A = _fmul(_fmul(Dinv, M), D)
        if any(x.denominator != 1 for row in A for x in row):
            return False
        nf = chain_ring_normal_form([[int(x) for x in row] for row in A], R)
        if any(e > 1 for e in nf.exponents) or nf.length != d:
            return False
    if group.upper() == "GSP":
        g = h // 2
        Jf = [[Fraction(0)] * h for _ in range(h)]
        for k in range(g):
            Jf[k][h - 1 - k] = Fraction(1)
            Jf[h - 1 - k][k] = Fraction(-1)
        ok = False
        for signs in itertools.product((1, -1), repeat=h):
            Ms = [[x * signs[b] for b, x in enumerate(row)] for row in M]
            Ms_t = [list(c) for c in zip(*Ms)]
            P = _fmul(_fmul(Ms_t, Jf), Ms)
            if P == [[x * p for x in row] for row in Jf] or P == [[-x * p for x in row] for row in Jf]:
                ok = True
                break
        if not ok:
            return False
    return True


def _windows(h):
    """All affine-permutation windows with i - 2h < sigma(i) < i + h.

    Every j has some i in J with j <= i < j + h, so sigma(j) <= i gives the upper bound;
    some i in J with i < j <= i + h and sigma(j) > i - h gives the lower one.
    """
    ranges = [range(i - 2 * h + 1, i + h) for i in range(1, h + 1)]

    def go(i, used, acc):
        if i == h:
            yield tuple(acc)
            return
        for v in ranges[i]:
            r = v % h
            if r not in used:
                used.add(r)
                acc.append(v)
                yield from go(i + 1, used, acc)
                acc.pop()
                used.discard(r)

    yield from go(0, set(), [])


def _test(method, p):
    if method == "combinatorial":
        return lambda w, d, J, group: is_admissible(w, d, J, group)
    if method == "lattice":
        return lambda w, d, J, group: is_admissible_lattice(w, d, J, p, group)
    raise ArgumentError(f"unknown method {method}")


def compose(x: AffinePermutation, w: AffinePermutation):
    return AffinePermutation(x.h, tuple(x(w(i)) for i in range(1, x.h + 1)))


def parahoric_weyl_group(h, J, group="GL", method="combinatorial", p=2):
    """W_J: affine permutations fixing every Lambda_i, i in J (index 0, similitude 0)."""
    J = _as_J(h, J)
    test = _test(method, p)
    out = []
    for win in _windows(h):
        w = AffinePermutation(h, win)
        if group.upper() == "GSP" and w.similitude() != 0:
            continue
        if test(w, 0, J, "GL"):
            out.append(w)
    return out


def permissible_set(h, d, J, group="GL", method="combinatorial", p=2):
    """All permissible elements in the search box, sorted by window."""
    J = _as_J(h, J)
    test = _test(method, p)
    return sorted((w for w in (AffinePermutation(h, win) for win in _windows(h))
                   if test(w, d, J, group)), key=lambda w: w.window)


def adm_enumerate(h, d, J, group="GL", method="combinatorial", p=2):
    """W_J-double cosets of admissible (= permissible) elements, each represented by its
    least window; sorted by window. For J = Z (Iwahori) W_J is trivial."""
    J = _as_J(h, J)
    elems = permissible_set(h, d, J, group, method, p)
    WJ = parahoric_weyl_group(h, J, group, method, p)
    present = set(elems)
    seen, out = set(), []
    for w in elems:
        if w in seen:
            continue
        coset = {compose(compose(x, w), y) for x in WJ for y in WJ}
        if not coset <= present:
            raise ValidationError("permissible set is not W_J-stable", {"w": w.to_json()})
        seen |= coset
        out.append(min(coset, key=lambda u: u.window))
    out.sort(key=lambda w: w.window)
    return out


def rotation_invariance(h, d, J, group="GL"):
    """is_admissible is unchanged by conjugation with length-zero shifts stabilizing J."""
    J = _as_J(h, J)
    shifts = range(1, h) if group.upper() == "GL" else [h // 2]
    shifts = [s for s in shifts if IndexSetJ(h, tuple(r + s for r in J.reps)).reps == J.reps]
    for s in shifts:
        for win in _windows(h):
            w = AffinePermutation(h, win)
            if is_admissible(w, d, J, group) != is_admissible(w.conjugate_shift(s), d, J, group):
                return False
    return True


# -- truncated displays up to isomorphism ---------------------------------------------

def _gl_matrices(W, h, cap):
    elems = list(W.elements())
    if len(elems) ** (h * h) > cap:
        raise ResourceError("state space exceeds cap")
    out = []
    for ent in itertools.product(elems, repeat=h * h):
        M = WittMatrix(W, [list(ent[r * h:(r + 1) * h]) for r in range(h)], h)
        if M.is_invertible():
            out.append(M)
    return out


def _key(M):
    return tuple(tuple(r) for r in M.rows)


@dataclass
class DisplayClassReport:
    h: int
    d: int
    q: int
    m: int
    n: int
    states: int
    classes: list            # [{"rep": psi rows, "size": k, "f_nilpotent": bool}]

    @property
    def count(self):
        return len(self.classes)

    def to_json(self):
        return {"h": self.h, "d": self.d, "q": self.q, "m": self.m, "n": self.n,
                "states": self.states, "class_count": self.count, "classes": self.classes}


def classify_truncated_displays(h, d, q, m, n, workers=1, cap=10 ** 6):
    """Orbits of Psi -> k^(n) Psi tilde(k)^{-1} on GL_h(W_n(F_q)) for pair automorphisms k."""
    F = _field(q)
    if not 0 <= d <= h or not 0 <= n <= m - 1:
        raise ArgumentError("need 0 <= d <= h and n <= m - 1")
    W = witt_ring(F, F.p, m)
    Wn = witt_ring(F, F.p, n)
    pair = NormalPair(W, d, h - d)
    if h == 0:
        return DisplayClassReport(h, d, F.q, m, n, 1, [{"rep": [], "size": 1, "f_nilpotent": True}])
    states = _gl_matrices(Wn, h, cap)
    gens = [PairMorphism(pair, pair, g) for g in pair.automorphism_generators()]
    orbits = partition(states, gens, act_on_psi, workers=workers, key=_key)
    classes = []
    for o in orbits:
        rep = o[0]
        nil = TruncatedDisplay(pair, rep).f_nilpotent() if n >= 1 else True
        classes.append({"rep": rep.to_json(), "size": len(o), "f_nilpotent": bool(nil)})
    return DisplayClassReport(h, d, F.q, m, n, len(states), classes)


def dieudonne_classes(h, d, q, workers=1, cap=10 ** 6):
    """BT_1 data on the Dieudonne side: pairs (F mod p, V mod p) with FV = VF = p, coming
    from F over W_2(F_q) of Hodge type (1^{h-d}, p^d), up to
    (F, V) -> (g F sigma(g)^{-1}, sigma(g) V g^{-1}) for g in GL_h(F_q)."""
    F = _field(q)
    W = witt_ring(F, F.p, 2)
    W1 = witt_ring(F, F.p, 1)
    elems = list(W.elements())
    if len(elems) ** (h * h) > cap:
        raise ResourceError("state space exceeds cap")
    target = [0] * (h - d) + [1] * d
    p = W.from_int(F.p)
    states = set()
    for ent in itertools.product(elems, repeat=h * h):
        M = WittMatrix(W, [list(ent[r * h:(r + 1) * h]) for r in range(h)], h)
        nf = chain_ring_normal_form(M)
        if sorted(nf.exponents) != target:
            continue
        # P M Q = D, so V = Q D* P with D* D = p
        Dstar = WittMatrix.diagonal(W, [p if e == 0 else W.one for e in nf.exponents])
        V = nf.Q @ Dstar @ nf.P
        if not (M @ V == WittMatrix.identity(W, h).scale(p) and V @ M == M @ V):
            raise ValidationError("V computation failed", {})
        states.add((_key(M.truncate(1)), _key(V.truncate(1))))
    states = sorted(states)
    gl = bounded_group_generators(W1, [[0] * h for _ in range(h)])
    gens = [(g, g.inverse(), g.frobenius_endo(), g.frobenius_endo().inverse()) for g in gl]

    def act(gg, st):
        g, gi, sg, sgi = gg
        Fm = WittMatrix(W1, [list(r) for r in st[0]], h)
        Vm = WittMatrix(W1, [list(r) for r in st[1]], h)
        return (_key(g @ Fm @ sgi), _key(sg @ Vm @ gi))

    orbits = partition(states, gens, act, workers=workers)
    return {"states": len(states), "class_count": len(orbits), "sizes": [len(o) for o in orbits]}


# -- EKOR -----------------------------------------------------------------------------

def chain_automorphisms(P: PolarizedChain, cap=10 ** 6):
    """All (k_t, u): pair automorphisms in normal coordinates commuting with rho and theta
    and with k_{-t}^T lambda_t k_t = u lambda_t."""
    C = P.chain
    pair = C.pair()
    J = C.J
    W = C.W
    gens = pair.automorphism_generators()
    ident = WittMatrix.identity(W, C.h)
    auts = sorted(orbit_of(ident, gens, lambda g, x: g @ x, cap), key=_key) if gens else [ident]
    if len(auts) ** J.k > cap:
        raise ResourceError("automorphism search exceeds cap")
    minus = [J.split(-r)[0] for r in J.reps]
    out = []

    def extend(prefix):
        t = len(prefix)
        if t == J.k:
            if prefix[0] @ C.rho[t - 1] != C.rho[t - 1] @ prefix[t - 1]:
                return
            u = None
            for s in range(J.k):
                L = P.lam[s]
                lhs = prefix[minus[s]].transpose() @ L @ prefix[s]
                nz = next((a, b) for a in range(C.h) for b in range(C.h) if W.is_unit(L.rows[a][b]))
                cand = W.mul(lhs.rows[nz[0]][nz[1]], W.inv(L.rows[nz[0]][nz[1]]))
                if u is None:
                    u = cand
                if cand != u or lhs != L.scale(u):
                    return
            out.append((tuple(prefix), u))
            return
        for k in auts:
            if k @ C.theta[t] != C.theta[t] @ k:
                continue
            if t and k @ C.rho[t - 1] != C.rho[t - 1] @ prefix[t - 1]:
                continue
            extend(prefix + [k])

    extend([])
    return out


def ekor_desk_count(g, J, q, m, workers=1, cap=10 ** 6):
    """Isomorphism classes of (m, 1)-truncated homogeneously polarized chains of displays
    on the standard symplectic chain, grouped by KR orbit.

    For each KR orbit a torus point fixes the chain of pairs; states are (Psi_r over W_1,
    iota-unit v) and the automorphisms (k, u) of the polarized chain of pairs act by
    Psi -> k Psi tilde(k)^{-1} and v -> v u / sigma(u).
    """
    F = _field(q)
    h = 2 * g
    J = _as_J(h, J)
    if not J.is_symmetric():
        raise ArgumentError("EKOR needs -J = J")
    pts = localmodel_enumerate(h, g, J, F, "GSp", cap=cap)
    kr = parahoric_orbits(pts, F, h, J, "GSp", workers)
    orbit_of_point = {pt: a for a, o in enumerate(kr.orbits) for pt in o}
    chosen = {}
    for S in lagrangian_torus_points(g, J):
        a = orbit_of_point[torus_subspaces(S, h)]
        chosen.setdefault(a, S)
    Wm = witt_ring(F, F.p, m)
    W1 = witt_ring(F, F.p, 1)
    classes = []
    for a in range(kr.count):
        if a not in chosen:
            continue
        S = chosen[a]
        P0 = standard_polarized_chain(g, J, F, F.p, m, n=1, S=S, displays=True)
        C = P0.chain
        pair = C.pair()
        stab = [([PairMorphism(pair, pair, k) for k in ks], u)
                for ks, u in chain_automorphisms(replace(P0, chain=C.forget_displays()), cap)]
        psis = _gl_matrices(W1, h, cap)
        units = [x for x in W1.elements() if W1.is_unit(x)]
        if len(psis) ** J.k * len(units) > cap:
            raise ResourceError("EKOR state space exceeds cap")
        states = []
        for combo in itertools.product(psis, repeat=J.k):
            for v in units:
                Pc = PolarizedChain(replace(C, psi=list(combo)), P0.lam,
                                    RankOneTwist(Wm, W1, Wm.one, v))
                if polarized_validate(Pc, "hpol", first_only=True)["ok"]:
                    states.append((tuple(_key(M) for M in combo), v))

        def act(gu, st):
            ks, u = gu
            combo = [WittMatrix(W1, [list(r) for r in rows], h) for rows in st[0]]
            new = tuple(_key(act_on_psi(k, M)) for k, M in zip(ks, combo))
            u1 = u[:1]
            v = W1.mul(st[1], W1.mul(u1, W1.inv(W1.frobenius_endo(u1))))
            return (new, v)

        orbits = partition(states, stab, act, workers=workers)
        for o in orbits:
            rows, v = o[0]
            psi0 = WittMatrix(W1, [list(r) for r in rows[0]], h)
            nil = TruncatedDisplay(pair, psi0).f_nilpotent()
            classes.append({"kr_orbit": a, "size": len(o), "f_nilpotent": bool(nil),
                            "rep": {"psi": [[list(map(list, r)) for r in M] for M in rows],
                                    "v": list(v)}})
    kr_of_class = [c["kr_orbit"] for c in classes]
    return {"g": g, "J": J.to_json(), "q": F.q, "m": m, "kr_orbits": kr.count,
            "kr_sizes": kr.sizes, "class_count": len(classes), "classes": classes,
            "well_defined": True,
            "surjective": set(kr_of_class) == set(range(kr.count)),
            "torus_rep_missing": [a for a in range(kr.count) if a not in chosen]}
