"""Independent reference computations used by the tests.

Nothing here imports wittdisp; the oracles work on plain ints and tuples.
"""
import itertools


def ghost(p, xs):
    return tuple(sum(p ** j * xs[j] ** (p ** (i - j)) for j in range(i + 1)) for i in range(len(xs)))


def from_ghost(p, ws):
    """Witt coordinates from ghost components over Z, by exact division."""
    xs = []
    for n, w in enumerate(ws):
        rest = w - sum(p ** j * xs[j] ** (p ** (n - j)) for j in range(n))
        assert rest % p ** n == 0
        xs.append(rest // p ** n)
    return tuple(xs)


def witt_add(p, x, y):
    return from_ghost(p, [a + b for a, b in zip(ghost(p, x), ghost(p, y))])


def witt_mul(p, x, y):
    return from_ghost(p, [a * b for a, b in zip(ghost(p, x), ghost(p, y))])


def witt_neg(p, x):
    return from_ghost(p, [-a for a in ghost(p, x)])


def witt_mod_p(p, x):
    return tuple(c % p for c in x)


def frob_over_Z(p, x):
    """sigma: W_m(Z) -> W_{m-1}(Z), gh_i(sigma x) = gh_{i+1}(x)."""
    return from_ghost(p, ghost(p, x)[1:])


def mat_rank_mod_p(rows, p):
    M = [[c % p for c in r] for r in rows]
    rank, ncols = 0, len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [v * inv % p for v in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c]:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def cokernel_size_mod(rows, n):
    """|Z/n^k / row span| by brute force."""
    k = len(rows[0])
    span = set()
    for coeffs in itertools.product(range(n), repeat=len(rows)):
        span.add(tuple(sum(c * r[j] for c, r in zip(coeffs, rows)) % n for j in range(k)))
    return n ** k // len(span)


def gaussian_binomial(n, k, q):
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def _span(vectors, q):
    out = {tuple([0] * len(vectors[0]))} if vectors else set()
    for v in vectors:
        out |= {tuple((a + c * b) % q for a, b in zip(u, v)) for u in out for c in range(q)}
    return frozenset(out)


def subspaces(h, d, q):
    """All d-dimensional subspaces of F_q^h (q prime) as frozensets of vectors."""
    vecs = [v for v in itertools.product(range(q), repeat=h) if any(v)]
    found = set()
    for combo in itertools.combinations(vecs, d):
        S = _span(list(combo), q) if d else frozenset({tuple([0] * h)})
        if len(S) == q ** d:
            found.add(S)
    if d == 0:
        found.add(frozenset({tuple([0] * h)}))
    return sorted(found, key=sorted)


def local_model_count(h, d, reps, q, symplectic=False):
    """Points of the local model of the standard chain over F_q (q prime) by brute force.

    The map Lambda_i -> Lambda_j mod p kills the coordinates k (1-based) with
    i < k <= j up to period; theta is the identity. For the symplectic case
    C_{-i} is the orthogonal of C_i for x^T J y with J = antidiag(1..1, -1..-1).
    """
    reps = sorted(reps)
    k = len(reps)
    edges = [(reps[t], reps[t + 1] if t + 1 < k else reps[0] + h) for t in range(k)]
    kill = [{c for c in range(1, h + 1) if i < c <= j or i < c + h <= j} for i, j in edges]
    grass = subspaces(h, d, q)
    g = h // 2

    def form(x, y):
        s = sum(x[a] * y[h - 1 - a] for a in range(g)) - sum(x[h - 1 - a] * y[a] for a in range(g))
        return s % q

    def perp(S):
        return frozenset(v for v in itertools.product(range(q), repeat=h)
                         if all(form(v, w) == 0 for w in S))

    def image_ok(t, A, B):
        return all(tuple(0 if c + 1 in kill[t] else v[c] for c in range(h)) in B for v in A)

    minus = [reps.index((-r) % h) for r in reps] if symplectic else None
    count = 0

    def go(prefix):
        nonlocal count
        t = len(prefix)
        if t == k:
            count += image_ok(k - 1, prefix[-1], prefix[0])
            return
        for S in grass:
            if t and not image_ok(t - 1, prefix[-1], S):
                continue
            if symplectic and minus[t] <= t and perp(prefix[minus[t]] if minus[t] < t else S) != S:
                continue
            go(prefix + [S])

    go([])
    return count
