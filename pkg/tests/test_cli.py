import json
from pathlib import Path

import jsonschema
import pytest

from wittdisp import cli

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_COMMANDS = {
    "adm_g1_full": ["adm", "--g", "1", "--J", "full"],
    "witt_p2_add": ["witt", "--p", "2", "--m", "2", "--op", "add", "--x", "1,0", "--y", "1,0"],
    "counterexample_p2_n1_q4": ["counterexample", "--p", "2", "--n", "1", "--q", "4"],
    "localmodel_g1_full": ["localmodel", "--g", "1", "--J", "full"],
    "classify_h2_d1": ["classify", "--h", "2", "--d", "1", "--dieudonne"],
    "ekor_g1_hyperspecial": ["ekor", "--g", "1", "--J", "hyperspecial"],
}


def run(capsys, argv):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("name", sorted(GOLDEN_COMMANDS))
def test_golden(capsys, name):
    code, out, _ = run(capsys, GOLDEN_COMMANDS[name])
    assert code == 0
    assert out.encode() == (GOLDEN / f"{name}.json").read_bytes()


def test_examples(capsys):
    _, out, _ = run(capsys, ["adm", "--g", "1", "--J", "full"])
    assert len(json.loads(out)["results"]["adm"]) == 3
    _, out, _ = run(capsys, ["witt", "--p", "2", "--m", "2", "--op", "add", "--x", "1,0", "--y", "1,0"])
    assert json.loads(out)["results"]["result"] == [0, 1]
    _, out, _ = run(capsys, ["witt", "--p", "3", "--m", "2", "--op", "mul", "--x", "2,1", "--y", "1,2",
                             "--ring", "Z"])
    assert json.loads(out)["results"]["result"] == [2, 23]
    _, out, _ = run(capsys, ["counterexample", "--p", "2", "--n", "1", "--q", "4", "--format", "table"])
    assert "liftable_count\t13" in out and "matches_D_x_union_V_y\ttrue" in out


def test_table_orbit_sizes(capsys):
    code, out, _ = run(capsys, ["localmodel", "--g", "1", "--J", "full", "--format", "table"])
    assert code == 0
    lines = out.splitlines()
    sizes = [int(l.split("\t")[1]) for l in lines[1:lines.index(next(l for l in lines if l.startswith("total")))]]
    total = int(next(l for l in lines if l.startswith("total")).split("\t")[1])
    assert sum(sizes) == total == 5


def test_emit():
    assert cli.emit([]) == "[]"
    assert cli.emit({}) == "[]"
    assert cli.emit({"results": []}, "table") == "[]"
    with pytest.raises(cli.ValidationError):
        cli.emit({"results": {"points": 3, "orbits": [{"size": 1}]}}, "table")


def test_usage_errors(capsys):
    code, _, err = run(capsys, ["adm", "--g", "1", "--bogus", "3"])
    assert code == 1 and '"properties"' in err
    code, _, err = run(capsys, ["witt", "--p", "2", "--m", "2", "--op", "add", "--x", "1,0"])
    assert code == 1
    code, _, err = run(capsys, ["ekor", "--g", "2", "--J", "1"])
    assert code == 1 and "symmetric" in err
    code, _, _ = run(capsys, ["localmodel", "--g", "1", "--q", "6"])
    assert code == 1


def test_schema_rejects_bad_flags():
    with pytest.raises(cli.click.UsageError):
        cli.dispatch("witt", {"p": 2, "m": 0, "op": "add", "x": "1", "y": "1", "q": None, "ring": "field"})


def test_resource_cap(capsys):
    code, _, err = run(capsys, ["localmodel", "--h", "4", "--d", "2", "--J", "full", "--cap", "50"])
    assert code == 2 and "cap" in err


def test_outputs_validate(capsys):
    for name, argv in GOLDEN_COMMANDS.items():
        _, out, _ = run(capsys, argv)
        report = json.loads(out)
        jsonschema.validate(report, cli.load_schema("report"))
        jsonschema.validate(report["results"], cli.load_schema(report["command"]))


@pytest.mark.parametrize("argv", [
    ["localmodel", "--g", "2", "--J", "0,2"],
    ["classify", "--h", "2", "--d", "1"],
    ["counterexample", "--p", "3", "--n", "1"],
])
def test_workers_do_not_change_output(capsys, argv):
    _, a, _ = run(capsys, argv + ["--workers", "1"])
    _, b, _ = run(capsys, argv + ["--workers", "4"])
    _, c, _ = run(capsys, argv + ["--workers", "4"])
    assert a == b == c


def test_seeded_commands_deterministic(capsys):
    argv = ["chain", "--h", "4", "--J", "0,1,3", "--d", "2", "--q", "3", "--m", "2", "--count", "3", "--seed", "5"]
    _, a, _ = run(capsys, argv)
    _, b, _ = run(capsys, argv)
    assert a == b
    r = json.loads(a)["results"]
    assert r["valid"] == 3 and r["mutations_rejected"] == r["mutations"]
