"""End-to-end CLI behaviour: subcommands, outputs, determinism, exit codes."""

import csv
import json

import numpy as np
import pytest

from gibbsqaoa import cli
from gibbsqaoa.analytics import expected_energy
from gibbsqaoa.problems import load_instance
from gibbsqaoa.qaoa import expectation
from gibbsqaoa.synthesis import StaircaseCircuit


def run_cli(*argv):
    return cli.main(list(argv))


@pytest.fixture
def instance(tmp_path):
    p = tmp_path / "inst.json"
    assert run_cli("gen", "--type", "maxcut", "--n", "6", "--seed", "1", "--out", str(p)) == 0
    return p


def test_gen_writes_loadable_instance(instance):
    obj, h = load_instance(instance)
    assert h.n == 6


def test_gen_tsp(tmp_path):
    p = tmp_path / "t.json"
    assert run_cli("gen", "--type", "tsp", "--cities", "3", "--seed", "2", "--out", str(p)) == 0
    _, h = load_instance(p)
    assert h.n == 9


def test_missing_instance_is_config_error(tmp_path):
    code = run_cli(
        "gibbs", "--instance", str(tmp_path / "nope.json"),
        "--seed", "1", "--t-total", "1", "--out", str(tmp_path / "o"),
    )
    assert code == cli.EXIT_CONFIG


def test_missing_time_is_config_error(instance, tmp_path):
    code = run_cli(
        "gibbs", "--instance", str(instance), "--seed", "1",
        "--out", str(tmp_path / "o"),
    )
    assert code == cli.EXIT_CONFIG


def test_gibbs_outputs(instance, tmp_path):
    out = tmp_path / "run"
    code = run_cli(
        "gibbs", "--instance", str(instance), "--seed", "3", "--t-total", "1",
        "--dtau", "0.05", "--chi", "8", "--samples", "300", "--out", str(out),
    )
    assert code == 0
    for name in ("config.json", "evolution.csv", "mps.json", "gibbs_report.json", "gibbs_scatter.csv"):
        assert (out / name).exists()
    report = json.loads((out / "gibbs_report.json").read_text())
    assert report["pearson_r"] < -0.99


def test_temperature_flag_equivalent_to_t_total(instance, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli("gibbs", "--instance", str(instance), "--seed", "3", "--t-total", "0.5",
            "--dtau", "0.05", "--chi", "8", "--samples", "300", "--out", str(a))
    run_cli("gibbs", "--instance", str(instance), "--seed", "3", "--temperature", "2",
            "--dtau", "0.05", "--chi", "8", "--samples", "300", "--out", str(b))
    assert (a / "evolution.csv").read_text() == (b / "evolution.csv").read_text()


def test_qaoa_subcommand_with_inits(instance, tmp_path):
    out = tmp_path / "q"
    code = run_cli(
        "qaoa", "--instance", str(instance), "--seed", "0", "--t-total", "1",
        "--p", "1", "--budget", "30", "--init", "gibbs:2.0", "--out", str(out),
    )
    assert code == 0
    data = json.loads((out / "qaoa_run.json").read_text())
    assert data["evaluations"] == 30
    assert data["initial_state"] == "gibbs:2.0"


def test_diagram_subcommand(instance, tmp_path):
    out = tmp_path / "d"
    assert run_cli("diagram", "--instance", str(instance), "--seed", "0",
                   "--t-total", "2", "--out", str(out)) == 0
    rows = list(csv.reader(open(out / "boltzmann.csv")))
    assert rows[0] == ["t", "energy", "entropy_bits"]
    assert len(rows) > 50


def test_pca_subcommand(instance, tmp_path):
    out = tmp_path / "p"
    assert run_cli("pca", "--instance", str(instance), "--seed", "0",
                   "--t-total", "1", "--grid", "8", "--out", str(out)) == 0
    summary = json.loads((out / "expressivity.json").read_text())
    assert summary["area"] >= 0 and summary["rank"] >= 1


def test_pipeline_outputs_and_consistency(instance, tmp_path):
    out = tmp_path / "pipe"
    code = run_cli(
        "pipeline", "--instance", str(instance), "--seed", "5", "--t-total", "2",
        "--dtau", "0.02", "--chi", "16", "--p", "2", "--budget", "60",
        "--samples", "300", "--out", str(out),
    )
    assert code == 0
    for name in (
        "instance.json", "config.json", "evolution.csv", "gibbs_report.json",
        "circuit.json", "qaoa_run.json", "combined_trace.csv", "mps.json",
    ):
        assert (out / name).exists()

    # stage boundary: the first recorded QAOA energy is the synthesized
    # circuit's energy
    _, h = load_instance(out / "instance.json")
    circuit = StaircaseCircuit.from_json((out / "circuit.json").read_text())
    start = expectation(circuit.state(), h)
    qdata = json.loads((out / "qaoa_run.json").read_text())

    rows = list(csv.reader(open(out / "combined_trace.csv")))
    assert rows[0] == ["stage", "step", "energy"]
    stages = [r[0] for r in rows[1:]]
    assert stages.index("qaoa") > stages.index("tn")

    tn_energies = [float(r[2]) for r in rows[1:] if r[0] == "tn"]
    assert tn_energies[-1] <= tn_energies[0]
    q_energies = [float(r[2]) for r in rows[1:] if r[0] == "qaoa"]
    assert q_energies[-1] <= q_energies[0] + 1e-12
    assert qdata["best_energy"] == pytest.approx(q_energies[-1])
    # the optimizer only ever improves on the synthesized starting state
    assert qdata["best_energy"] <= start + 1e-10


def test_pipeline_deterministic(instance, tmp_path):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        run_cli("pipeline", "--instance", str(instance), "--seed", "9",
                "--t-total", "1", "--dtau", "0.05", "--chi", "8", "--p", "1",
                "--budget", "30", "--samples", "200", "--out", str(out))
        outs.append(out)
    for name in ("evolution.csv", "combined_trace.csv", "gibbs_report.json", "qaoa_run.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_decompose_roundtrip(instance, tmp_path):
    run_dir = tmp_path / "g"
    run_cli("gibbs", "--instance", str(instance), "--seed", "3", "--t-total", "1",
            "--dtau", "0.05", "--chi", "8", "--samples", "300", "--out", str(run_dir))
    circ_path = tmp_path / "c.json"
    code = run_cli("decompose", "--mps", str(run_dir / "mps.json"),
                   "--out", str(circ_path), "--kak")
    assert code == 0
    data = json.loads(circ_path.read_text())
    assert data["achieved_fidelity"] > 0.9
    assert "kak" in data["layers"][0][0]


def test_config_file_with_flag_override(instance, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "instance": str(instance), "seed": 3, "t_total": 1.0,
        "dtau": 0.05, "chi": 8, "samples": 300,
    }))
    out = tmp_path / "o"
    assert run_cli("gibbs", "--config", str(cfg), "--out", str(out)) == 0
    resolved = json.loads((out / "config.json").read_text())
    assert resolved["chi"] == 8 and resolved["out"] == str(out)


def test_invalid_numeric_config_rejected(instance, tmp_path):
    code = run_cli("gibbs", "--instance", str(instance), "--seed", "1",
                   "--t-total", "1", "--chi", "-4", "--out", str(tmp_path / "o"))
    assert code == cli.EXIT_CONFIG
