"""Command line front end: `wittdisp <subcommand> [flags]`, JSON or table output."""
from __future__ import annotations

import json
import random
import sys
from importlib import resources

import click
import jsonschema

from . import __version__
from .errors import ArgumentError, DomainError, ResourceError, ValidationError, WittDispError
from .rings import finite_field, Integers
from .witt import vector, witt_arithmetic, witt_ring
from .chains import (IndexSetJ, random_chain, chain_validate, chain_display_validate, tilde_chain,
                     rdt_verify, rdt_dual_coherence, chain_dual_tilde_coherence, mutate_chain,
                     MUTATIONS)
from .displays import random_frobenius, dieudonne_roundtrip, display_from_dieudonne, DieudonneModule
from . import strata, counterexample


def load_schema(name):
    return json.loads(resources.files("wittdisp").joinpath("schemas", f"{name}.json").read_text())


def _parse_J(h, spec, polarized=False):
    J = IndexSetJ.parse(h, spec)
    if polarized and not J.is_symmetric():
        raise ArgumentError(f"J = {list(J.reps)} is not symmetric (-J != J)")
    return J


def _shape(g, h, d):
    if g is not None:
        return 2 * g, g, "GSp"
    if h is None or d is None:
        raise ArgumentError("give --g, or --h and --d")
    return h, d, "GL"


# -- subcommand bodies ------------------------------------------------------------------

def run_witt(p, m, op, x, y, q, ring):
    R = Integers() if ring == "Z" else finite_field(q or p)
    X = vector(R, p, [int(c) for c in x.split(",")])
    if len(X.coords) != m:
        raise ArgumentError(f"--x needs {m} coordinates")
    Y = None
    if op in ("add", "sub", "mul"):
        if y is None:
            raise ArgumentError(f"--y is required for {op}")
        Y = vector(R, p, [int(c) for c in y.split(",")])
        if len(Y.coords) != m:
            raise ArgumentError(f"--y needs {m} coordinates")
    Z = witt_arithmetic(op, X, Y)
    out = {"ring": R.to_json(), "result": [R.elem_to_json(c) for c in Z.coords]}
    if ring == "Z":
        out["ghost"] = [int(g) for g in Z.ghost()]
    return out


def run_display(h, d, q, m, count, seed):
    F = finite_field(q)
    rng = random.Random(seed)
    W = witt_ring(F, F.p, m)
    rows = []
    for _ in range(count):
        Fm = random_frobenius(W, h, d, rng)
        a = dieudonne_roundtrip("F", Fm)
        D = display_from_dieudonne(DieudonneModule(Fm)).display
        b = dieudonne_roundtrip("display", D)
        rows.append({"F_route": a.ok, "display_route": b.ok, "type": [a.h, a.d]})
    return {"count": count, "ok": sum(1 for r in rows if r["F_route"] and r["display_route"]),
            "cases": rows}


def run_chain(h, J, d, q, m, count, seed):
    F = finite_field(q)
    J = _parse_J(h, J)
    rng = random.Random(seed)
    out = {"valid": 0, "tilde_valid": 0, "rdt_ok": 0, "dual_ok": 0, "mutations": 0,
           "mutations_rejected": 0, "reports": []}
    for _ in range(count):
        C = random_chain(h, J, F, F.p, m, rng, d=d, displays=m >= 2)
        rep = chain_display_validate(C) if C.psi is not None else chain_validate(C)
        out["valid"] += rep["ok"]
        if m >= 2:
            out["tilde_valid"] += chain_validate(tilde_chain(C.forget_displays()))["ok"]
            out["dual_ok"] += chain_dual_tilde_coherence(C.forget_displays())
        else:
            out["tilde_valid"] += 1
            out["dual_ok"] += 1
        out["rdt_ok"] += rdt_verify(C)["ok"] and rdt_dual_coherence(C)
        for kind in MUTATIONS:
            try:
                M, i = mutate_chain(C, kind, rng)
            except ArgumentError:
                continue
            r = chain_display_validate(M) if M.psi is not None else chain_validate(M)
            out["mutations"] += 1
            out["mutations_rejected"] += not r["ok"]
            if r["violations"]:
                out["reports"].append({"mutation": kind, "index": i, "first": r["violations"][0]})
    return out


def run_localmodel(g, h, d, J, q, workers, cap):
    h, d, group = _shape(g, h, d)
    J = _parse_J(h, J, group == "GSp")
    pts = strata.localmodel_enumerate(h, d, J, q, group, cap=cap)
    rep = strata.parahoric_orbits(pts, q, h, J, group, workers)
    return {"group": group, "h": h, "d": d, "J": J.to_json(), **rep.to_json()}


def run_adm(g, h, d, J, method, p):
    h, d, group = _shape(g, h, d)
    J = _parse_J(h, J, group == "GSp")
    adm = strata.adm_enumerate(h, d, J, group, method, p)
    return {"group": group, "h": h, "d": d, "J": J.to_json(), "count": len(adm),
            "adm": [w.to_json() for w in adm]}


def run_classify(h, d, q, m, n, workers, dieudonne, cap):
    rep = strata.classify_truncated_displays(h, d, q, m, n, workers, cap).to_json()
    if dieudonne:
        rep["dieudonne"] = strata.dieudonne_classes(h, d, q, workers, cap)
    return rep


def run_ekor(g, J, q, m, workers, cap):
    J = _parse_J(2 * g, J, True)
    return strata.ekor_desk_count(g, J, q, m, workers, cap)


def run_counterexample(p, n, q, workers):
    return counterexample.classify_locus(p, n, q or p, workers)


RUNNERS = {"witt": run_witt, "display": run_display, "chain": run_chain,
           "localmodel": run_localmodel, "adm": run_adm, "classify": run_classify,
           "ekor": run_ekor, "counterexample": run_counterexample}


# -- output -------------------------------------------------------------------------------

def _table(results):
    if results in ([], {}, None):
        return "[]"
    if isinstance(results, list):
        return "\n".join(json.dumps(r) for r in results)
    lines = []
    if "orbits" in results:
        sizes = [o["size"] for o in results["orbits"]]
        if sum(sizes) != results["points"]:
            raise ValidationError("orbit sizes do not sum to the point count", {})
        lines.append("orbit\tsize")
        lines += [f"{k}\t{s}" for k, s in enumerate(sizes)]
        lines.append(f"total\t{results['points']}")
    for k, v in results.items():
        if k == "orbits":
            continue
        if isinstance(v, list) and v and isinstance(v[0], dict):
            cols = list(v[0].keys())
            lines.append(f"{k}:")
            lines.append("\t".join(cols))
            for row in v:
                lines.append("\t".join(json.dumps(row.get(c)) for c in cols))
        else:
            lines.append(f"{k}\t{json.dumps(v)}")
    return "\n".join(lines)


def emit(report, fmt="json"):
    if fmt == "table":
        return _table(report["results"] if isinstance(report, dict) and "results" in report else report)
    if report in ([], {}):
        return "[]"
    return json.dumps(report, indent=2)


def dispatch(command, flags, fmt="json"):
    """Validate flags against the subcommand schema, run it, return the report dict."""
    schema = load_schema("flags")["properties"].get(command)
    if schema is None:
        raise ArgumentError(f"unknown subcommand {command}")
    try:
        jsonschema.validate(flags, schema)
    except jsonschema.ValidationError as e:
        raise click.UsageError(f"{e.message}\nschema: {json.dumps(schema, indent=2)}")
    args = {k: v for k, v in flags.items() if k not in ("format",)}
    results = RUNNERS[command](**args)
    # workers is left out of the echo so that 1 and N workers give identical bytes
    inputs = {k: flags[k] for k in schema["properties"] if k != "workers" and k in flags}
    report = {"command": command, "inputs": inputs, "version": __version__, "results": results}
    jsonschema.validate(report, load_schema("report"))
    jsonschema.validate(results, load_schema(command))
    return report


# -- click wiring ---------------------------------------------------------------------------

def _capped(f):
    return click.option("--cap", type=int, default=10 ** 6, help="state-space cap; exit 2 above it")(f)


def _common(f):
    f = click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="json")(f)
    return f


def _finish(command, flags, fmt):
    report = dispatch(command, flags, fmt)
    click.echo(emit(report, fmt))


@click.group()
@click.version_option(__version__)
def main_group():
    """Witt vectors, truncated displays, chains and strata over finite rings."""


@main_group.command()
@click.option("--p", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.option("--op", type=click.Choice(["add", "sub", "mul", "neg", "inv"]), required=True)
@click.option("--x", required=True)
@click.option("--y", default=None)
@click.option("--q", type=int, default=None)
@click.option("--ring", type=click.Choice(["field", "Z"]), default="field")
@_common
def witt(fmt, **kw):
    _finish("witt", kw, fmt)


@main_group.command()
@click.option("--h", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--q", type=int, default=2)
@click.option("--m", type=int, default=3)
@click.option("--count", type=int, default=10)
@click.option("--seed", type=int, default=0)
@_common
def display(fmt, **kw):
    _finish("display", kw, fmt)


@main_group.command()
@click.option("--h", type=int, required=True)
@click.option("--J", "J", default="full")
@click.option("--d", type=int, required=True)
@click.option("--q", type=int, default=2)
@click.option("--m", type=int, default=2)
@click.option("--count", type=int, default=10)
@click.option("--seed", type=int, default=0)
@_common
def chain(fmt, **kw):
    _finish("chain", kw, fmt)


@main_group.command()
@click.option("--g", type=int, default=None)
@click.option("--h", type=int, default=None)
@click.option("--d", type=int, default=None)
@click.option("--J", "J", default="full")
@click.option("--q", type=int, default=2)
@click.option("--workers", type=int, default=1)
@_capped
@_common
def localmodel(fmt, **kw):
    _finish("localmodel", kw, fmt)


@main_group.command()
@click.option("--g", type=int, default=None)
@click.option("--h", type=int, default=None)
@click.option("--d", type=int, default=None)
@click.option("--J", "J", default="full")
@click.option("--method", type=click.Choice(["combinatorial", "lattice"]), default="combinatorial")
@click.option("--p", type=int, default=2)
@_common
def adm(fmt, **kw):
    _finish("adm", kw, fmt)


@main_group.command()
@click.option("--h", type=int, required=True)
@click.option("--d", type=int, required=True)
@click.option("--q", type=int, default=2)
@click.option("--m", type=int, default=2)
@click.option("--n", type=int, default=1)
@click.option("--workers", type=int, default=1)
@click.option("--dieudonne/--no-dieudonne", default=False)
@_capped
@_common
def classify(fmt, **kw):
    _finish("classify", kw, fmt)


@main_group.command()
@click.option("--g", type=int, default=1)
@click.option("--J", "J", default="full")
@click.option("--q", type=int, default=2)
@click.option("--m", type=int, default=2)
@click.option("--workers", type=int, default=1)
@_capped
@_common
def ekor(fmt, **kw):
    _finish("ekor", kw, fmt)


@main_group.command("counterexample")
@click.option("--p", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--q", type=int, default=None)
@click.option("--workers", type=int, default=1)
@_common
def counterexample_cmd(fmt, **kw):
    _finish("counterexample", kw, fmt)


def main(argv=None):
    """Entry point; returns the exit code (0 ok, 1 usage or validation error, 2 resource cap)."""
    try:
        main_group.main(args=argv, prog_name="wittdisp", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        if e.ctx is not None and e.ctx.command is not None:
            name = e.ctx.command.name
            schema = load_schema("flags")["properties"].get(name)
            if schema is not None:
                click.echo(json.dumps(schema, indent=2), err=True)
        return 1
    except click.ClickException as e:
        click.echo(e.format_message(), err=True)
        return 1
    except ResourceError as e:
        click.echo(f"resource cap exceeded: {e}", err=True)
        return 2
    except (ValidationError, ArgumentError, DomainError, WittDispError, jsonschema.ValidationError) as e:
        click.echo(f"error: {e}", err=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
