"""Acceptance criteria 1-9, each printing one PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` or `python3 tests/test_acceptance.py`.
"""
import json
import random
import subprocess
import sys
import time

import pytest

from wittdisp.rings import Integers, PolynomialRing, finite_field, truncated_polynomial
from wittdisp.witt import vector, witt_ring
from wittdisp.linmod import RankOneTwist
from wittdisp.displays import (NormalPair, PairMorphism, tilde, tilde_dual_square, tilde_twist_square,
                               random_frobenius, dieudonne_roundtrip, display_from_dieudonne,
                               DieudonneModule)
from wittdisp.chains import (IndexSetJ, random_chain, chain_validate, chain_display_validate, tilde_chain,
                             rdt_verify, rdt_dual_coherence, chain_dual_tilde_coherence,
                             chain_twist_coherence, mutate_chain, MUTATIONS)
from wittdisp.strata import localmodel_enumerate, parahoric_orbits, adm_enumerate, ekor_desk_count
from wittdisp.counterexample import obstruction_identity, classify_locus


def test_criterion_1_ghost_equivalence(verdict):
    t0 = time.perf_counter()
    Zx = PolynomialRing(Integers(), ("x",))
    Zxy = PolynomialRing(Integers(), ("x", "y"))
    rng = random.Random(1)
    bad = pairs = 0
    for p in (2, 3):
        for m in (1, 2, 3, 4):
            for k in range(125):
                # two variables where the ghost components stay small enough for the budget
                R = Zxy if m <= 3 and k % 2 else Zx
                x = vector(R, p, [R.random(rng) for _ in range(m)])
                y = vector(R, p, [R.random(rng) for _ in range(m)])
                gx, gy = x.ghost(), y.ghost()
                bad += (x + y).ghost() != tuple(R.add(a, b) for a, b in zip(gx, gy))
                bad += (x * y).ghost() != tuple(R.mul(a, b) for a, b in zip(gx, gy))
                pairs += 1
    dt = time.perf_counter() - t0
    verdict(1, pairs == 1000 and bad == 0 and dt < 10, f"{pairs} pairs, {bad} mismatches, {dt:.2f}s")


def test_criterion_2_divided_frobenius(verdict):
    bad = total = 0
    for R in (finite_field(2), finite_field(4), finite_field(3), finite_field(9),
              truncated_polynomial(2, "x", 3)):
        p = R.p
        rng = random.Random(p * 31 + 7)
        for m in (2, 3, 4):
            W, Wn = witt_ring(R, p, m), witt_ring(R, p, m - 1)
            for _ in range(1000):
                x = W.random(rng, ideal=True)
                y = Wn.random(rng)
                bad += Wn.mul_int(W.divided_frobenius(x), p) != W.frobenius(x)
                bad += W.divided_frobenius(W.V(y)) != y
                total += 1
    verdict(2, bad == 0, f"{total} inputs, {bad} failures")


def test_criterion_3_tilde_suite(verdict):
    t0 = time.perf_counter()
    bad = count = 0
    for R, m in ((finite_field(2), 3), (truncated_polynomial(2, "x", 3), 2)):
        W = witt_ring(R, 2, m)
        rng = random.Random(m)
        unit = lambda: next(u for u in iter(lambda: W.random(rng), None) if W.is_unit(u))
        while count < (250 if m == 3 else 500):
            shapes = [NormalPair(W, rng.randint(0, 2), rng.randint(0, 2)) for _ in range(3)]
            if any(P.h == 0 for P in shapes):
                continue
            A, B, C = shapes
            f, g = PairMorphism.random(A, B, rng), PairMorphism.random(B, C, rng)
            bad += tilde(g @ f) != tilde(g) @ tilde(f)
            bad += not tilde_dual_square(f)
            bad += not tilde_twist_square(f, unit())
            count += 1
    dt = time.perf_counter() - t0
    verdict(3, count >= 500 and bad == 0 and dt < 30, f"{count} morphisms, {bad} failures, {dt:.2f}s")


def test_criterion_4_dieudonne_roundtrip(verdict):
    rng = random.Random(4)
    bad = 0
    for k in range(200):
        q = (2, 4, 8)[k % 3]
        h = 1 + (k // 3) % 4
        d = rng.randint(0, h)
        W = witt_ring(finite_field(q), 2, 3)
        Fm = random_frobenius(W, h, d, rng)
        a = dieudonne_roundtrip("F", Fm)
        b = dieudonne_roundtrip("display", display_from_dieudonne(DieudonneModule(Fm)).display)
        bad += not (a.ok and b.ok and (a.h, a.d) == (b.h, b.d) == (h, d))
    verdict(4, bad == 0, f"200 Frobenius matrices, {bad} failures")


def test_criterion_5_counterexample(verdict):
    t0 = time.perf_counter()
    ok = all(obstruction_identity(p, n)[0] for p, n in ((2, 1), (2, 2), (3, 1), (3, 2)))
    for p, n in ((2, 1), (2, 2), (3, 1), (3, 2)):
        for q in (2, 3, 4):
            if q % p:
                continue
            r = classify_locus(p, n, q)
            ok &= r["matches_D_x_union_V_y"] and r["all_backed"] and r["identity_holds"]
    dt = time.perf_counter() - t0
    verdict(5, ok and dt < 60, f"{dt:.2f}s")


def test_criterion_6_kr_adm(verdict):
    rows = []
    for J, expected in (("full", 3), ("2gZ", 1)):
        n_adm = len(adm_enumerate(2, 1, J, "GSp"))
        for q in (2, 3):
            pts = localmodel_enumerate(2, 1, J, q, "GSp")
            rows.append((f"g=1 J={J} q={q}", parahoric_orbits(pts, q, 2, J, "GSp").count, n_adm, expected))
    pts = localmodel_enumerate(4, 2, "full", 2, "GSp")
    orbits = parahoric_orbits(pts, 2, 4, "full", "GSp").count
    perm = len(adm_enumerate(4, 2, "full", "GSp", "lattice", p=2))
    rows.append(("g=2 J=Z q=2", orbits, perm, 13))
    ok = all(a == b == c for _, a, b, c in rows)
    verdict(6, ok, "; ".join(f"{n}: {a} orbits / {b} admissible" for n, a, b, _ in rows))


def test_criterion_7_ekor(verdict):
    r = ekor_desk_count(1, "2gZ", 2, 2)
    nil = sorted(c["f_nilpotent"] for c in r["classes"])
    ok1 = r["class_count"] == 2 and nil == [False, True]
    s = ekor_desk_count(1, "full", 2, 2)
    ok2 = s["class_count"] >= 3 and s["well_defined"] and s["surjective"]
    verdict(7, ok1 and ok2, f"J=2Z: {r['class_count']} classes; J=Z: {s['class_count']} classes "
                            f"over {s['kr_orbits']} KR orbits")


def _localized(rep, i, h):
    for v in rep["violations"]:
        a, b = v.get("i"), v.get("j", v.get("i"))
        if a is None:
            continue
        # the reported edge or range covers the mutated index up to period
        if any(a <= i + s * h <= b for s in range(-2, 3)):
            return True
    return False


def test_criterion_8_chain_suite(verdict):
    rng = random.Random(8)
    chains_ok = n_chains = 0
    rejected = n_mut = 0
    while n_chains < 500:
        h = rng.randint(1, 4)
        reps = tuple(sorted(rng.sample(range(h), rng.randint(1, h))))
        q = rng.choice((2, 3))
        m = rng.choice((2, 3))
        d = rng.randint(0, h)
        F = finite_field(q)
        C = random_chain(h, IndexSetJ(h, reps), F, q, m, rng, d=d, n=m - 1, displays=True)
        W, Wn = C.W, witt_ring(F, q, m - 1)
        u = next(x for x in iter(lambda: W.random(rng), None) if W.is_unit(x))
        v = next(x for x in iter(lambda: Wn.random(rng), None) if Wn.is_unit(x))
        ok = (chain_display_validate(C)["ok"] and chain_validate(tilde_chain(C))["ok"]
              and rdt_verify(C)["ok"] and rdt_dual_coherence(C)
              and chain_dual_tilde_coherence(C) and chain_twist_coherence(C, RankOneTwist(W, Wn, u, v)))
        chains_ok += ok
        n_chains += 1
        if h < 2:
            continue
        kinds = [k for k in MUTATIONS if k != "pair-block" or 0 < d < h]
        kind = kinds[n_mut % len(kinds)]
        bad, i = mutate_chain(C, kind, rng)
        rep = chain_display_validate(bad)
        rejected += (not rep["ok"]) and _localized(rep, i, h)
        n_mut += 1
    while n_mut < 500:
        C = random_chain(4, IndexSetJ(4, (0, 1, 3)), finite_field(3), 3, 2, rng, d=2, n=1, displays=True)
        bad, i = mutate_chain(C, MUTATIONS[n_mut % len(MUTATIONS)], rng)
        rep = chain_display_validate(bad)
        rejected += (not rep["ok"]) and _localized(rep, i, 4)
        n_mut += 1
    verdict(8, chains_ok == n_chains == 500 and rejected == n_mut == 500,
            f"{chains_ok}/{n_chains} chains valid, {rejected}/{n_mut} mutations rejected")


GOLDEN_ARGV = [
    ["adm", "--g", "1", "--J", "full"],
    ["localmodel", "--g", "2", "--J", "full", "--workers", "{w}"],
    ["classify", "--h", "2", "--d", "1", "--dieudonne", "--workers", "{w}"],
    ["ekor", "--g", "1", "--J", "full", "--workers", "{w}"],
    ["counterexample", "--p", "2", "--n", "1", "--q", "4", "--workers", "{w}"],
    ["chain", "--h", "3", "--J", "0,2", "--d", "1", "--q", "3", "--count", "4", "--seed", "9"],
]


def _cli(argv, w):
    cmd = [sys.executable, "-m", "wittdisp.cli"] + [a.format(w=w) for a in argv]
    return subprocess.run(cmd, capture_output=True, check=True).stdout


def test_criterion_9_cli_golden(verdict):
    ok = True
    for argv in GOLDEN_ARGV:
        a, b, c = _cli(argv, 1), _cli(argv, 1), _cli(argv, 4)
        ok &= a == b == c
        json.loads(a)
    verdict(9, ok, f"{len(GOLDEN_ARGV)} commands, two runs and 1 vs 4 workers")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
