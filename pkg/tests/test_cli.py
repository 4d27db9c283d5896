import json
import os

import pytest

from locallemma.cli import (
    EXIT_FAIL,
    EXIT_INDETERMINATE,
    EXIT_PARSE,
    EXIT_PASS,
    EXIT_USAGE,
    main,
)
from locallemma.numeric import e_interval

FANO_FILE = """hypergraph 7 7
1 2 3
1 4 5
1 6 7
2 4 6
2 5 7
3 4 7
3 5 6
"""

K4_FILE = """hypergraph 4 4
1 2 3
1 2 4
1 3 4
2 3 4
"""

INSTANCE = {
    "variables": [2, 2, 2],
    "events": [
        {"scope": [0, 1], "bad_assignments": [[1, 1]]},
        {"scope": [1, 2], "bad_assignments": [[1, 1]]},
    ],
    "seed": 1,
}


@pytest.fixture
def fano_path(tmp_path):
    p = tmp_path / "fano.hg"
    p.write_text(FANO_FILE)
    return str(p)


@pytest.fixture
def k4_path(tmp_path):
    p = tmp_path / "k4.hg"
    p.write_text(K4_FILE)
    return str(p)


@pytest.fixture
def instance_path(tmp_path):
    p = tmp_path / "inst.json"
    p.write_text(json.dumps(INSTANCE))
    return str(p)


@pytest.fixture
def digraph_path(tmp_path):
    lines = ["digraph 9"]
    for u in range(1, 10):
        for v in range(1, 10):
            if u != v:
                lines.append(f"{u} {v}")
    p = tmp_path / "k9.dg"
    p.write_text("\n".join(lines) + "\n")
    return str(p)


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------

def test_symmetric_pass_exit_zero(capsys):
    rc = main(["criteria", "--variant", "e_d_plus_1", "--p", "0.1", "--d", "2", "--n", "5"])
    assert rc == EXIT_PASS
    assert "pass" in capsys.readouterr().out


def test_symmetric_fail_exit_one(capsys):
    rc = main(["criteria", "--variant", "e_d_plus_1", "--p", "0.5", "--d", "1", "--n", "2"])
    assert rc == EXIT_FAIL


def test_spencer_exact_threshold(capsys):
    rc = main(["criteria", "--variant", "spencer", "--p", "0.25", "--d", "1", "--n", "3"])
    assert rc == EXIT_PASS


def test_indeterminate_exit_two(capsys):
    # p within 2^-2046 of 1/(2e): undecidable at the 1024-bit escalation cap
    p = (e_interval(2048) * 2).reciprocal().lo
    rc = main(["criteria", "--variant", "e_d_plus_1",
               "--p", f"{p.numerator}/{p.denominator}", "--d", "1", "--n", "2"])
    assert rc == EXIT_INDETERMINATE


def test_usage_error_exit(capsys):
    assert main(["criteria", "--variant", "abstract"]) == EXIT_USAGE
    assert main(["ramsey", "--figure1"]) == EXIT_USAGE


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.dg"
    bad.write_text("digraph 3\n1 x\n")
    rc = main(["criteria", "--variant", "abstract", "--graph", str(bad),
               "--probs", "0.1,0.1,0.1", "--weights", "0.2,0.2,0.2"])
    assert rc == EXIT_PARSE
    err = capsys.readouterr().err
    assert "line 2" in err
    assert main(["mt", "--file", str(tmp_path / "missing.json")]) == EXIT_PARSE


# ---------------------------------------------------------------------------
# criteria plumbing
# ---------------------------------------------------------------------------

def test_abstract_via_files(tmp_path, capsys):
    g = tmp_path / "g.dg"
    g.write_text("digraph 2\n1 2\n2 1\n")
    rc = main(["criteria", "--variant", "abstract", "--graph", str(g),
               "--probs", "0.3,0.3", "--weights", "0.4,0.4", "--format", "json"])
    assert rc == EXIT_FAIL
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "fail" and payload["lower_bound"] is None


def test_cluster_via_files(tmp_path, capsys):
    g = tmp_path / "g.g"
    g.write_text("graph 3\n1 2\n2 3\n1 3\n")
    rc = main(["criteria", "--variant", "cluster", "--graph", str(g),
               "--probs", "1/5,1/5,1/5", "--weights", "1,1,1", "--format", "json"])
    assert rc == EXIT_PASS
    payload = json.loads(capsys.readouterr().out)
    assert payload["lower_bound"]["lo"] == "1/4"


# ---------------------------------------------------------------------------
# ramsey
# ---------------------------------------------------------------------------

def test_ramsey_csv_row(capsys):
    rc = main(["ramsey", "--k", "10", "--variant", "ver4", "--format", "csv"])
    assert rc == EXIT_PASS
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "k,ver4"
    assert out.splitlines()[1] == "10,105"


def test_ramsey_table_json(capsys):
    rc = main(["ramsey", "--k", "10..20", "--step", "5", "--format", "json"])
    assert rc == EXIT_PASS
    rows = json.loads(capsys.readouterr().out)["table"]
    assert rows[0] == {"k": 10, "ver3": 99, "ver4": 105}
    assert rows[2] == {"k": 20, "ver3": 7742, "ver4": 7754}


def test_ramsey_convention_flagged(capsys):
    main(["ramsey", "--k", "10", "--format", "csv"])
    assert "convention" in capsys.readouterr().err


def test_figure1_curve(capsys):
    rc = main(["ramsey", "--figure1", "--eps-grid", "0.3:0.9:0.15", "--format", "csv"])
    assert rc == EXIT_PASS
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "epsilon,k0_exact,k0_approx"
    ks = [int(line.split(",")[1]) for line in lines[1:]]
    assert ks == sorted(ks, reverse=True)
    assert all(k >= 3 for k in ks)


def test_output_file_and_plot(tmp_path):
    csv_path = tmp_path / "curve.csv"
    png_path = tmp_path / "curve.png"
    rc = main(["ramsey", "--figure1", "--eps-grid", "0.2:0.8:0.2",
               "--format", "csv", "--output", str(csv_path), "--plot", str(png_path)])
    assert rc == EXIT_PASS
    assert csv_path.read_text().startswith("epsilon,")
    assert png_path.stat().st_size > 1000


def test_ramsey_table_plot(tmp_path):
    png = tmp_path / "bounds.png"
    rc = main(["ramsey", "--k", "10..20", "--step", "5", "--format", "csv",
               "--output", str(tmp_path / "t.csv"), "--plot", str(png)])
    assert rc == EXIT_PASS and png.stat().st_size > 1000


def test_ramsey_jobs_parallel(capsys):
    rc = main(["ramsey", "--k", "10..15", "--step", "5", "--jobs", "2", "--format", "csv"])
    assert rc == EXIT_PASS
    out = capsys.readouterr().out
    assert "10,99,105" in out and "15,948,956" in out


# ---------------------------------------------------------------------------
# hypergraph
# ---------------------------------------------------------------------------

def test_table2_csv(capsys):
    rc = main(["hypergraph", "table2", "--format", "csv"])
    assert rc == EXIT_PASS
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "r,k,A,B"
    assert "21,5,7,8" in lines and "48,8,27,28" in lines
    assert len(lines) == 8


def test_table2_extra_pairs(capsys):
    rc = main(["hypergraph", "table2", "--pairs", "10:3", "--format", "csv"])
    assert rc == EXIT_PASS
    assert len(capsys.readouterr().out.strip().splitlines()) == 9


def test_hypergraph_check_k4_fails(k4_path, capsys):
    rc = main(["hypergraph", "check", "--file", k4_path, "--k", "2"])
    assert rc == EXIT_FAIL  # d=3: e*3 > 2^2


def test_hypergraph_solve_k4(k4_path, capsys):
    rc = main(["hypergraph", "solve", "--file", k4_path, "--k", "2", "--seed", "3",
               "--format", "json"])
    assert rc == EXIT_PASS
    payload = json.loads(capsys.readouterr().out)
    colors = payload["colors"]
    assert sorted(colors) == [0, 0, 1, 1]


def test_hypergraph_solve_fano_nontermination(fano_path, capsys):
    rc = main(["hypergraph", "solve", "--file", fano_path, "--k", "2",
               "--max-steps", "200"])
    assert rc == EXIT_FAIL
    payload = json.loads(capsys.readouterr().out)
    assert payload["colors"] is None
    assert payload["criterion"]["verdict"] == "fail"
    assert "e*d <= k^(r-1)" in payload["explanation"]


# ---------------------------------------------------------------------------
# mt
# ---------------------------------------------------------------------------

def test_mt_run_replay_byte_identical(instance_path, capsys):
    rc = main(["mt", "--file", instance_path, "--format", "json"])
    assert rc == EXIT_PASS
    first = capsys.readouterr().out
    main(["mt", "--file", instance_path, "--format", "json"])
    assert capsys.readouterr().out == first


def test_mt_witness_tree(instance_path, capsys):
    rc = main(["mt", "--file", instance_path, "--seed-override", "1",
               "--witness-tree", "1"])
    payload = json.loads(capsys.readouterr().out)
    if payload["log"]["steps"]:
        assert payload["witness_tree_proper"] is True
        assert payload["witness_tree"]["label"] == payload["log"]["steps"][0]["event"]
    else:
        assert rc in (EXIT_PASS, EXIT_USAGE)


def test_mt_gw(instance_path, capsys):
    rc = main(["mt", "--file", instance_path, "--gw", "1", "--x", "0.2,0.2",
               "--trials", "300"])
    assert rc == EXIT_PASS
    payload = json.loads(capsys.readouterr().out)
    assert payload["trials"] == 300
    assert sum(t["count"] for t in payload["trees"]) <= 300
    top = payload["trees"][0]
    assert abs(top["frequency"] - top["probability"]["lo_float"]) < 0.15


# ---------------------------------------------------------------------------
# digraph
# ---------------------------------------------------------------------------

def test_digraph_check(digraph_path, capsys):
    rc = main(["digraph", "check", "--file", digraph_path, "--k", "2", "--format", "json"])
    assert rc == EXIT_PASS
    payload = json.loads(capsys.readouterr().out)
    assert payload["relaxed"]["verdict"] == "pass"
    assert payload["delta"] == 8 and payload["Delta"] == 8


def test_digraph_solve_then_cycle(digraph_path, tmp_path, capsys):
    rc = main(["digraph", "solve", "--file", digraph_path, "--k", "2", "--seed", "4",
               "--output", str(tmp_path / "colors.json")])
    assert rc == EXIT_PASS
    rc = main(["digraph", "cycle", "--file", digraph_path, "--k", "2", "--seed", "4"])
    assert rc == EXIT_PASS
    cert = json.loads(capsys.readouterr().out)
    assert cert["valid"] and cert["length_divisible"] and cert["length"] % 2 == 0


def test_digraph_cycle_rejects_invalid_coloring(digraph_path, tmp_path, capsys):
    bad = tmp_path / "bad_colors.json"
    bad.write_text(json.dumps({"k": 2, "colors": [0] * 9}))
    rc = main(["digraph", "cycle", "--file", digraph_path, "--coloring", str(bad)])
    assert rc == EXIT_FAIL
    assert "not valid" in capsys.readouterr().err


def test_digraph_cycle_from_valid_coloring(tmp_path, capsys):
    cyc = tmp_path / "c6.dg"
    cyc.write_text("digraph 6\n" + "\n".join(f"{i} {i % 6 + 1}" for i in range(1, 7)) + "\n")
    colors = tmp_path / "colors.json"
    colors.write_text(json.dumps({"k": 3, "colors": [0, 1, 2, 0, 1, 2]}))
    rc = main(["digraph", "cycle", "--file", str(cyc), "--coloring", str(colors)])
    assert rc == EXIT_PASS
    cert = json.loads(capsys.readouterr().out)
    assert cert["length"] == 6


# ---------------------------------------------------------------------------
# misc plumbing
# ---------------------------------------------------------------------------

def test_precision_env_override(capsys, monkeypatch):
    monkeypatch.setenv("LOCALLEMMA_PRECISION", "64")
    rc = main(["criteria", "--variant", "e_d_plus_1", "--p", "0.1", "--d", "2", "--n", "5"])
    assert rc == EXIT_PASS
    monkeypatch.setenv("LOCALLEMMA_PRECISION", "8")  # below the [32, 1024] floor
    rc = main(["criteria", "--variant", "e_d_plus_1", "--p", "0.1", "--d", "2", "--n", "5"])
    assert rc == EXIT_USAGE


# ---------------------------------------------------------------------------
# shipped JSON schemas
# ---------------------------------------------------------------------------

SCHEMA_DIR = os.path.join(os.path.dirname(__file__), "..", "docs", "schemas")


def _validate(payload, schema_name):
    jsonschema = pytest.importorskip("jsonschema")
    from referencing import Registry, Resource

    resources = []
    for fname in os.listdir(SCHEMA_DIR):
        with open(os.path.join(SCHEMA_DIR, fname)) as fh:
            resources.append((fname, Resource.from_contents(json.load(fh))))
    registry = Registry().with_resources(resources)
    with open(os.path.join(SCHEMA_DIR, schema_name)) as fh:
        schema = json.load(fh)
    jsonschema.validators.Draft7Validator(schema, registry=registry).validate(payload)


def test_json_outputs_match_shipped_schemas(k4_path, fano_path, instance_path, digraph_path, capsys):
    main(["criteria", "--variant", "half", "--p", "0.05", "--d", "3", "--n", "4",
          "--format", "json"])
    _validate(json.loads(capsys.readouterr().out), "verdict.json")

    main(["ramsey", "--k", "10..15", "--step", "5", "--format", "json"])
    _validate(json.loads(capsys.readouterr().out), "ramsey_table.json")

    main(["ramsey", "--figure1", "--eps-grid", "0.4:0.8:0.2", "--format", "json"])
    _validate(json.loads(capsys.readouterr().out), "curve.json")

    main(["hypergraph", "table2", "--format", "json"])
    _validate(json.loads(capsys.readouterr().out), "rainbow_table.json")

    main(["mt", "--file", instance_path, "--seed-override", "1",
          "--witness-tree", "1", "--format", "json"])
    _validate(json.loads(capsys.readouterr().out), "mt_output.json")

    main(["digraph", "cycle", "--file", digraph_path, "--k", "2", "--seed", "1"])
    _validate(json.loads(capsys.readouterr().out), "certificate.json")

    main(["digraph", "check", "--file", digraph_path, "--k", "2", "--format", "json"])
    _validate(json.loads(capsys.readouterr().out), "digraph_check.json")

    main(["hypergraph", "solve", "--file", k4_path, "--k", "2", "--format", "json"])
    _validate(json.loads(capsys.readouterr().out), "coloring_result.json")

    main(["hypergraph", "solve", "--file", fano_path, "--k", "2", "--max-steps", "100"])
    _validate(json.loads(capsys.readouterr().out), "coloring_result.json")

    main(["mt", "--file", instance_path, "--gw", "1", "--x", "0.2,0.2",
          "--trials", "200"])
    _validate(json.loads(capsys.readouterr().out), "branching_experiment.json")


def test_precision_flag_reaches_computations(capsys):
    from locallemma import numeric

    before = numeric.get_default_precision()
    try:
        rc = main(["--precision", "256", "criteria", "--variant", "half",
                   "--p", "0.05", "--d", "3", "--n", "4"])
        assert rc == EXIT_PASS
        assert numeric.get_default_precision() == 256
    finally:
        numeric.set_default_precision(before)


def test_table2_plot(tmp_path):
    png = tmp_path / "caps.png"
    rc = main(["hypergraph", "table2", "--format", "csv",
               "--output", str(tmp_path / "t2.csv"), "--plot", str(png)])
    assert rc == EXIT_PASS and png.stat().st_size > 1000
