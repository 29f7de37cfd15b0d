import json

import pytest

from coalseek.cli import main
from coalseek.scenario import (
    SCHEMA_KEY,
    ScenarioError,
    available_presets,
    load_scenario,
    parse_scenario,
)


def _minimal_doc(**overrides):
    doc = {
        "schema": SCHEMA_KEY,
        "name": "mini",
        "coalitions": [
            {
                "costs": ["(x1_1 - 1)^2 + 0.2*x1_1*x1_2", "(x1_2 + 1)^2 + 0.2*x1_1*x1_2"],
                "communication": [[1, 2]],
            }
        ],
    }
    doc.update(overrides)
    return doc


# --- loading and validation -----------------------------------------------------


def test_presets_catalog():
    assert available_presets() == ("coalition1-fig1", "congestion-demo", "example2")


def test_example2_shape(example2):
    game = example2.game
    assert game.n_coalitions == 3
    assert game.sizes == (1, 3, 6)
    assert game.n_actions == 10
    assert game.coalitions[1].interference.edge_pairs() == ((1, 2), (1, 3), (2, 3))
    assert example2.x_star == (0.0,) * 10
    assert all(v.passed for v in example2.containment.values())
    assert example2.warnings == ()


def test_initial_x_matches_published_run(example2):
    assert example2.initial_x == (4.0, 1.6, -1.2, -0.8, 0.0, 0.4, 1.0, 1.4, 1.8, 4.0)


def test_congestion_reference_metadata(congestion_demo):
    ref = congestion_demo.reference["published_equilibrium"]
    assert ref == [12.63, 5.58, 3.68, 6.12, 5.16, 2.03, 2.03, 10.16, 10.16, 5.63]


def test_parse_minimal_document():
    scenario = parse_scenario(_minimal_doc())
    assert scenario.game.n_actions == 2
    assert scenario.params.step == 1e-3 and scenario.params.horizon == 100.0
    assert scenario.initial_x == (0.0, 0.0)
    assert scenario.seed == 0


def test_interference_inferred_when_omitted():
    scenario = parse_scenario(_minimal_doc())
    assert scenario.game.coalitions[0].interference.edge_pairs() == ((1, 2),)


def test_declared_interference_missing_edge_rejected():
    doc = _minimal_doc()
    doc["coalitions"][0]["interference"] = []
    with pytest.raises(ScenarioError, match=r"dependence edge \(1,2\)"):
        parse_scenario(doc)


def test_declared_interference_supergraph_allowed():
    doc = _minimal_doc()
    doc["coalitions"][0]["costs"] = ["(x1_1 - 1)^2", "(x1_2 + 1)^2"]
    doc["coalitions"][0]["interference"] = [[1, 2]]
    scenario = parse_scenario(doc)
    assert scenario.game.coalitions[0].interference.edge_pairs() == ((1, 2),)


def test_unknown_schema_rejected():
    with pytest.raises(ScenarioError, match="unsupported schema"):
        parse_scenario(_minimal_doc(schema="nope/v9"))


def test_bad_cost_string_names_key():
    doc = _minimal_doc()
    doc["coalitions"][0]["costs"][1] = "x1_2 +"
    with pytest.raises(ScenarioError, match=r"coalitions\[0\].costs\[1\]"):
        parse_scenario(doc)


def test_weights_default_to_one():
    scenario = parse_scenario(_minimal_doc())
    assert scenario.game.coalitions[0].comm.weight(1, 2) == 1.0


def test_explicit_weight_kept():
    doc = _minimal_doc()
    doc["coalitions"][0]["communication"] = [[1, 2, 2.5]]
    scenario = parse_scenario(doc)
    assert scenario.game.coalitions[0].comm.weight(1, 2) == 2.5


def test_nonzero_w_requires_flag():
    doc = _minimal_doc(initial_w=[[1, 1, 1, 0.5]])
    with pytest.raises(ScenarioError, match="allow_nonzero_w"):
        parse_scenario(doc)
    doc["allow_nonzero_w"] = True
    scenario = parse_scenario(doc)
    state = scenario.initial_state()
    assert state.w[scenario.game.layout.slot(1, 1, 1)] == 0.5
    assert state.w.sum() == 0.5


def test_containment_failure_is_warning_not_error():
    doc = _minimal_doc()
    doc["coalitions"][0]["communication"] = []  # disconnected comm graph
    scenario = parse_scenario(doc)
    assert scenario.warnings
    assert not scenario.containment[1].passed


def test_initial_x_length_checked():
    with pytest.raises(ScenarioError, match="initial_x"):
        parse_scenario(_minimal_doc(initial_x=[1.0]))


def test_load_from_path(tmp_path):
    path = tmp_path / "mini.json"
    path.write_text(json.dumps(_minimal_doc()))
    scenario = load_scenario(path)
    assert scenario.name == "mini"


def test_unknown_preset_raises():
    with pytest.raises(FileNotFoundError, match="unknown preset"):
        load_scenario("does-not-exist")


# --- CLI ---------------------------------------------------------------------------


def test_cli_usage_error_exit_code(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1


def test_cli_missing_scenario_exit_code(capsys):
    assert main(["solve", "no-such-preset"]) == 1


def test_cli_validation_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(_minimal_doc(schema="wrong")))
    assert main(["solve", str(bad)]) == 2
    assert "validation error" in capsys.readouterr().err


def test_cli_numerical_failure_exit_code(tmp_path, capsys):
    doc = {
        "schema": SCHEMA_KEY,
        "name": "runaway",
        "coalitions": [{"costs": ["10*log(x1_1 + 1)"], "communication": []}],
        "integrator": {"step": 1.0, "horizon": 50.0, "record_stride": 1},
        "initial_x": [-0.5],
        "delta": 1.0,
    }
    path = tmp_path / "runaway.json"
    path.write_text(json.dumps(doc))
    assert main(["run", str(path), "--out", str(tmp_path / "t.csv")]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_cli_run_writes_csv_and_summary(tmp_path, capsys):
    out = tmp_path / "fig1.csv"
    summary = tmp_path / "fig1.txt"
    code = main(
        [
            "run",
            "coalition1-fig1",
            "--out",
            str(out),
            "--summary",
            str(summary),
            "--horizon",
            "20",
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("t,x1_1,x1_2,x1_3,x1_4")
    assert len(lines) > 2
    assert "wall_time_s" in summary.read_text()
    assert "x1_1" in capsys.readouterr().out


def test_cli_run_example2_final_row_near_origin(tmp_path):
    out = tmp_path / "example2.csv"
    assert main(["run", "example2", "--out", str(out)]) == 0
    last = out.read_text().splitlines()[-1].split(",")
    actions = [abs(float(v)) for v in last[1:11]]
    assert max(actions) <= 0.05


def test_cli_run_csv_deterministic(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for target in (a, b):
        assert main(["run", "coalition1-fig1", "--out", str(target), "--horizon", "10"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_solve_kv_deterministic(capsys):
    assert main(["solve", "example2", "--format", "kv"]) == 0
    first = capsys.readouterr().out
    assert main(["solve", "example2", "--format", "kv"]) == 0
    second = capsys.readouterr().out
    assert first == second
    assert "converged=true" in first


def test_cli_graphs_lists_neighborhoods(capsys):
    assert main(["graphs", "example2"]) == 0
    out = capsys.readouterr().out
    assert "coalition 3" in out
    assert "component 4: vertices 2,3,4 edges 2-4 3-4" in out
    assert out.count("containment check: pass") == 2


def test_cli_costs_kv(capsys):
    assert main(["costs", "example2", "--format", "kv"]) == 0
    out = capsys.readouterr().out
    assert "agent.3_1.dropped=4,5" in out
    assert "agent.3_4.dropped=1,5,6" in out


def test_cli_check_reports_violation(capsys):
    assert main(["check", "example2"]) == 0
    out = capsys.readouterr().out
    assert "monotone_on_sample" in out
    assert "gradient_max_rel_err" in out


def test_cli_delta_override_changes_run(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["run", "coalition1-fig1", "--out", str(a), "--horizon", "5"]) == 0
    assert main(
        ["run", "coalition1-fig1", "--out", str(b), "--horizon", "5", "--delta", "0.05"]
    ) == 0
    assert a.read_bytes() != b.read_bytes()


def test_cli_presets_command(capsys):
    assert main(["presets"]) == 0
    assert capsys.readouterr().out.split() == list(available_presets())
