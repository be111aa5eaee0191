"""The (h, J, d) = (2, Z, 1) truncated Lau-Zink chain whose lifting locus is D(x) u V(y).

All statements are checked at F_q-points (x, y) of the base; the perfect base ring
itself is never built.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ArgumentError
from .rings import finite_field, Modular, PolynomialRing
from .witt import witt_ring
from .linmod import WittMatrix
from .displays import LauZinkMorphism
from .chains import Chain, IndexSetJ, chain_validate


@dataclass(frozen=True)
class CounterexampleConfig:
    p: int
    n: int
    q: int | None = None
    x: int = 0
    y: int = 0

    def __post_init__(self):
        if self.p not in (2, 3, 5, 7):
            raise ArgumentError("p must be a prime <= 7")
        if not 1 <= self.n <= 3:
            raise ArgumentError("n must be between 1 and 3")
        q = self.p if self.q is None else self.q
        k, r = 0, q
        while r % self.p == 0:
            r //= self.p
            k += 1
        if r != 1 or k == 0:
            raise ArgumentError(f"q = {q} is not a power of p = {self.p}")
        object.__setattr__(self, "q", q)
        if not (0 <= self.x < q and 0 <= self.y < q):
            raise ArgumentError("point coordinates must be field codes in [0, q)")

    @property
    def field(self):
        return finite_field(self.q)

    @property
    def Wn(self):
        return witt_ring(self.field, self.p, self.n)


@dataclass
class ObstructionReport:
    status: str                       # liftable-with-witness | obstructed
    value: list                       # upper-left entry in W_{n+1}(F_q), or the witness
    expected: list
    detail: dict

    def to_json(self):
        return {"status": self.status, "value": self.value, "expected": self.expected,
                "detail": self.detail}


def _entries(cfg, x, y, eps):
    """rho_{0,1}, rho_{1,2} with lower-left p + eps [y] p^n."""
    Wn = cfg.Wn
    W1 = witt_ring(cfg.field, cfg.p, cfg.n + 1)
    c = W1.add(W1.from_int(cfg.p), W1.mul(W1.teich(y), W1.from_int(cfg.p ** cfg.n))) if eps \
        else W1.from_int(cfg.p)
    tx = Wn.teich(x)
    r01 = LauZinkMorphism.from_entries(Wn, [[tx]], [[Wn.one]], [[c]], [[Wn.zero]])
    r12 = LauZinkMorphism.from_entries(Wn, [[Wn.zero]], [[Wn.one]], [[c]], [[Wn.neg(tx)]])
    return r01, r12


def build_example(cfg: CounterexampleConfig):
    """The chain M at the point (x, y) and the comparison chain M' (same with y = 0)."""
    r01, r12 = _entries(cfg, cfg.x, cfg.y, True)
    s01, s12 = _entries(cfg, cfg.x, cfg.y, False)
    return {"rho": (r01, r12), "rho_prime": (s01, s12),
            "theta": LauZinkMorphism.scalar(cfg.Wn, 1, 1, 1)}


def lz_chain_validate(cfg, rho):
    """Period composites equal p (theta = id) from both representatives, and the mod-p
    ranks of rho_{0,1}, rho_{1,2} and the period map are 1, 1 and 0."""
    r01, r12 = rho
    p = LauZinkMorphism.scalar(cfg.Wn, 1, 1, cfg.p)
    out = []
    if r12.compose_after(r01) != p:
        out.append({"check": "period", "i": 0, "j": 2})
    if r01.compose_after(r12) != p:
        out.append({"check": "period", "i": 1, "j": 3})
    F = cfg.field
    for name, f in (("rho_0_1", r01), ("rho_1_2", r12)):
        # c lies in I_{n+1}, so it vanishes mod p
        rows = [[f.a[0][0][0], f.b[0][0][0]], [F.zero, f.d[0][0][0]]]
        rank = 0 if all(F.is_zero(v) for r in rows for v in r) else \
            (1 if F.is_zero(F.add(F.mul(rows[0][0], rows[1][1]), F.neg(F.mul(rows[0][1], rows[1][0])))) else 2)
        if rank != 1:
            out.append({"check": "rank", "map": name, "rank": rank})
    return {"ok": not out, "violations": out}


def composite_is_p(cfg):
    """rho_{1,2} o rho_{0,1} = (p + [y] p^n) id, whose diagonal lives in W_n where p^n = 0."""
    ex = build_example(cfg)
    r01, r12 = ex["rho"]
    return r12.compose_after(r01) == LauZinkMorphism.scalar(cfg.Wn, 1, 1, cfg.p)


def lift_of_prime(cfg, m=None):
    """M' lifts by the same expression: a chain of pairs over W_m with m = n + 1."""
    m = cfg.n + 1 if m is None else m
    W = witt_ring(cfg.field, cfg.p, m)
    tx, p = W.teich(cfg.x), W.from_int(cfg.p)
    r01 = WittMatrix(W, [[tx, W.one], [p, W.zero]], 2)
    r12 = WittMatrix(W, [[W.zero, W.one], [p, W.neg(tx)]], 2)
    I = WittMatrix.identity(W, 2)
    return Chain(W, IndexSetJ.full(2), [r01, r12], [I, I], d=1)


def _truncate_lz(cfg, M: WittMatrix):
    n = cfg.n
    W1 = witt_ring(cfg.field, cfg.p, n + 1)
    c = M.rows[1][0]
    c = tuple(c[:n + 1]) + (cfg.field.zero,) * max(0, n + 1 - len(c))
    return LauZinkMorphism(cfg.Wn, (1, 1, 1, 1), ((M.rows[0][0][:n],),), ((M.rows[0][1][:n],),),
                           ((W1.coerce(c),),), ((M.rows[1][1][:n],),))


def lift_witness(cfg: CounterexampleConfig, route=None):
    """Witness that M lifts at (x, y) when x != 0 (isomorphism alpha to M') or y = 0 (M = M')."""
    F = cfg.field
    x0, y0 = F.is_zero(cfg.x), F.is_zero(cfg.y)
    if x0 and not y0:
        raise ArgumentError("no lift exists at x = 0, y != 0; use obstruction_symbolic")
    ex = build_example(cfg)
    r01, r12 = ex["rho"]
    s01, s12 = ex["rho_prime"]
    lift = lift_of_prime(cfg)
    lift_ok = chain_validate(lift)["ok"] and \
        _truncate_lz(cfg, lift.rho[0]) == s01 and _truncate_lz(cfg, lift.rho[1]) == s12
    routes = {}
    if route in (None, "direct") and y0:
        routes["direct"] = {"ok": r01 == s01 and r12 == s12 and lift_ok}
    if route in (None, "alpha") and not x0:
        Wn = cfg.Wn
        W1 = witt_ring(F, cfg.p, cfg.n + 1)
        t = W1.mul(W1.teich(F.mul(F.inv(cfg.x), cfg.y)), W1.from_int(cfg.p ** cfg.n))
        a0 = LauZinkMorphism.scalar(Wn, 1, 1, 1)
        a1 = LauZinkMorphism.from_entries(Wn, [[Wn.one]], [[Wn.zero]], [[t]], [[Wn.one]])
        a1_inv = LauZinkMorphism.from_entries(Wn, [[Wn.one]], [[Wn.zero]], [[W1.neg(t)]], [[Wn.one]])
        ok = (r01.compose_after(a0) == a1.compose_after(s01)
              and r12.compose_after(a1) == a0.compose_after(s12)
              and a1.compose_after(a1_inv) == a0 and a1_inv.compose_after(a1) == a0)
        routes["alpha"] = {"ok": ok and lift_ok,
                           "alpha_1_lower_left": [F.elem_to_json(c) for c in t]}
    if not routes:
        raise ArgumentError(f"route {route} does not apply at this point")
    good = all(r["ok"] for r in routes.values())
    return ObstructionReport("liftable-with-witness" if good else "witness-failed",
                             [], [], {"routes": routes})


LIFT_PARAMETERS = ("a", "b", "c", "d", "e", "f", "g", "h")


def obstruction_polynomial(p, n):
    """Upper-left entry of rho^lift_{1,2} o rho^lift_{0,1} over Z/p^{n+1}[a..h, Y], Y = [y].

    (p^n e)(p^n a) + (1 + p^n f)(p + Y p^n + p^{n+1} c)
    """
    R = PolynomialRing(Modular(p, n + 1), LIFT_PARAMETERS + ("Y",))
    v = {s: R.var(s) for s in LIFT_PARAMETERS + ("Y",)}
    pn = R.from_int(p ** n)
    lower = R.sum([R.from_int(p), R.mul(v["Y"], pn), R.mul(R.from_int(p ** (n + 1)), v["c"])])
    entry = R.add(R.mul(R.mul(pn, v["e"]), R.mul(pn, v["a"])),
                  R.mul(R.add(R.one, R.mul(pn, v["f"])), lower))
    return R, entry


def obstruction_identity(p, n):
    """The entry equals p + Y p^n as a polynomial: no lift parameter survives mod p^{n+1}."""
    R, entry = obstruction_polynomial(p, n)
    expected = R.add(R.from_int(p), R.mul(R.var("Y"), R.from_int(p ** n)))
    return entry == expected, R, entry


def obstruction_symbolic(p, n, y, q=None):
    """A lift with theta^lift lifting the identity needs the period composite to be p,
    so its upper-left entry must be p mod p^{n+1}; the entry is p + [y] p^n whatever a..h are.
    Obstructed iff [y] p^n != 0 in W_{n+1}(F_q), i.e. iff y != 0."""
    cfg = CounterexampleConfig(p, n, q, 0, y)
    ok, R, entry = obstruction_identity(p, n)
    W1 = witt_ring(cfg.field, p, n + 1)
    value = W1.add(W1.from_int(p), W1.mul(W1.teich(y), W1.from_int(p ** n)))
    expected = W1.from_int(p)
    F = cfg.field
    detail = {"identity_holds": ok, "entry": _poly_str(R, entry)}
    if cfg.q == p:
        detail["value_mod"] = (p + (y % p) * p ** n) % p ** (n + 1)
        detail["modulus"] = p ** (n + 1)
    status = "obstructed" if value != expected else "not-obstructed"
    return ObstructionReport(status, [F.elem_to_json(c) for c in value],
                             [F.elem_to_json(c) for c in expected], detail)


def _poly_str(R, f):
    names = R.variables
    terms = []
    for exps, c in f:
        mono = "*".join(f"{v}^{e}" if e > 1 else v for v, e in zip(names, exps) if e)
        terms.append(f"{c}*{mono}" if mono else str(c))
    return " + ".join(terms) if terms else "0"


def classify_locus(p, n, q, workers=1):
    """Verdict at every (x, y) in F_q^2, each backed by a witness or an obstruction."""
    cfg0 = CounterexampleConfig(p, n, q)
    F = cfg0.field
    identity_holds = obstruction_identity(p, n)[0]
    points = []
    for x in range(cfg0.q):
        for y in range(cfg0.q):
            cfg = CounterexampleConfig(p, n, q, x, y)
            valid = lz_chain_validate(cfg, build_example(cfg)["rho"])["ok"]
            if F.is_zero(x) and not F.is_zero(y):
                rep = obstruction_symbolic(p, n, y, q)
                status = rep.status
                wo = {"obstruction": rep.value, "expected": rep.expected}
            else:
                rep = lift_witness(cfg)
                status = rep.status
                wo = rep.detail["routes"]
            points.append({"x": x, "y": y, "chain_valid": valid, "status": status,
                           "witness_or_obstruction": wo})
    liftable = {(pt["x"], pt["y"]) for pt in points if pt["status"] == "liftable-with-witness"}
    expected = {(x, y) for x in range(cfg0.q) for y in range(cfg0.q)
                if not F.is_zero(x) or F.is_zero(y)}
    return {"p": p, "n": n, "q": cfg0.q, "identity_holds": identity_holds,
            "liftable_count": len(liftable), "total": cfg0.q ** 2,
            "matches_D_x_union_V_y": liftable == expected,
            "all_backed": all(pt["status"] in ("liftable-with-witness", "obstructed") for pt in points),
            "points": points}
