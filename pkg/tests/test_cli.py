import json
import subprocess
import sys

import pytest

from forbearance.cli import fmt, main
from forbearance.presets import load_preset

SUBCOMMANDS = ("game", "stability", "panel", "fit", "replicate")


def run(capsys, *argv):
    """Run the CLI in-process; usage errors surface as exit status 2."""
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


# --- formatting ---------------------------------------------------------------------------

@pytest.mark.parametrize("v, text", [(-1.0, "-1.0"), (0.5, "0.5"), (0.4, "0.4"),
                                     (1.1156006217, "1.1156"), (1234567.0, "1.23457e+06"),
                                     (-0.0, "0.0"), (3.0, "3.0")])
def test_fmt(v, text):
    assert fmt(v) == text


# --- game -----------------------------------------------------------------------------------

def test_game_sustainable(capsys):
    code, out, _ = run(capsys, "game", "--pi-c", "1", "--pi-d", "2", "--pi-p", "0",
                       "--delta", "0.6", "--horizon", "30")
    assert code == 0
    assert out.splitlines()[0] == "sustainable: true, delta*: 0.5"
    assert sum(1 for ln in out.splitlines() if "Cooperate" in ln and "Defect" not in ln) == 30


def test_game_unsustainable(capsys):
    code, out, _ = run(capsys, "game", "--pi-c", "1", "--pi-d", "2", "--delta", "0.3")
    assert code == 0
    assert out.startswith("sustainable: false, delta*: 0.5")


def test_game_delta_one_is_usage_error(capsys):
    code, _, err = run(capsys, "game", "--pi-c", "1", "--pi-d", "2", "--delta", "1.0")
    assert code == 2
    assert "delta" in err


def test_game_bad_payload_ordering_is_domain_error(capsys):
    code, _, err = run(capsys, "game", "--pi-c", "2", "--pi-d", "1", "--delta", "0.5")
    assert code == 1
    assert err.startswith("error:")


def test_game_json_and_collusion_index(capsys, tmp_path):
    path = tmp_path / "g.json"
    code, out, _ = run(capsys, "game", "--pi-c", "1", "--pi-d", "2", "--delta", "0.6",
                       "--horizon", "3", "--strategy-i", "AlwaysDefect", "--observed", "0.5",
                       "--out", str(path))
    assert code == 0
    assert "collusion index: 0.5" in out
    doc = json.loads(path.read_text())
    assert [p["action_i"] for p in doc["outcome"]["periods"]] == ["Defect"] * 3
    assert doc["delta_star"] == 0.5 and doc["collusion_index"] == 0.5


# --- stability ---------------------------------------------------------------------------------

def test_stability_stable_node(capsys):
    code, out, _ = run(capsys, "stability", "--a", "0.4", "--b", "0.2", "--age", "1",
                       "--sigma", "1.2", "--phi", "0.4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "eigenvalues: -1.0, -0.4; class: StableNode"
    assert lines[1] == "equilibrium: (0.5578, 1.1156)"


def test_stability_saddle(capsys):
    code, out, _ = run(capsys, "stability", "--a", "-0.4", "--b", "0.2", "--age", "1",
                       "--sigma", "1.2", "--phi", "0.4")
    assert code == 0
    assert "class: SaddlePath" in out


def test_stability_singular(capsys):
    code, out, _ = run(capsys, "stability", "--a", "0")
    assert code == 0
    assert "equilibrium: none" in out


def test_stability_outputs_deterministic(capsys, tmp_path):
    for tag in ("a", "b"):
        code, _, _ = run(capsys, "stability", "--svg", str(tmp_path / f"{tag}.svg"),
                         "--csv", str(tmp_path / f"{tag}.csv"),
                         "--json", str(tmp_path / f"{tag}.json"),
                         "--start", "0.1,0.2", "--start", "1,2", "--isoquant", "0.5")
        assert code == 0
    for ext in ("svg", "csv", "json"):
        assert (tmp_path / f"a.{ext}").read_bytes() == (tmp_path / f"b.{ext}").read_bytes()
    doc = json.loads((tmp_path / "a.json").read_text())
    assert doc["class"] == "StableNode"
    assert (tmp_path / "a.csv").read_text().count("\n") == 401


def test_stability_bad_flags(capsys):
    assert run(capsys, "stability", "--phi", "1.5")[0] == 1
    assert run(capsys, "stability", "--dt", "0")[0] == 2
    assert run(capsys, "stability", "--start", "1")[0] == 2


def test_unwritable_output_is_exit_one(capsys, tmp_path):
    code, _, err = run(capsys, "stability", "--svg", str(tmp_path / "no" / "x.svg"))
    assert code == 1 and "error" in err


# --- panel and fit --------------------------------------------------------------------------------

def test_panel_rows(capsys, tmp_path):
    path = tmp_path / "p.csv"
    code, _, _ = run(capsys, "panel", "--preset", "conglomerate", "--firms", "50",
                     "--periods", "5", "--seed", "7", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "firm_id,period,growth,endowment,age,export_intensity,phi"
    assert len(lines) == 251


def test_panel_stdout_deterministic_and_env_seed(capsys, monkeypatch):
    a = run(capsys, "panel", "--preset", "sme", "--firms", "5", "--seed", "3")[1]
    b = run(capsys, "panel", "--preset", "sme", "--firms", "5", "--seed", "3")[1]
    assert a == b
    monkeypatch.setenv("FORBEARANCE_SEED", "3")
    assert run(capsys, "panel", "--preset", "sme", "--firms", "5")[1] == a
    monkeypatch.setenv("FORBEARANCE_SEED", "banana")
    assert run(capsys, "panel", "--preset", "sme", "--firms", "5")[0] == 2


def test_fit_glm_recovers_preset_dgp(capsys, tmp_path):
    csv = tmp_path / "sme.csv"
    out = tmp_path / "fit.json"
    assert run(capsys, "panel", "--preset", "sme", "--noise-sd", "0", "--seed", "5",
               "--out", str(csv))[0] == 0
    code, text, _ = run(capsys, "fit", str(csv), "--estimator", "glm", "--out", str(out))
    assert code == 0
    assert "GlmGaussianIdentity" in text
    dgp = load_preset("sme").spec.dgp
    got = {v["name"]: v["coefficient"] for v in json.loads(out.read_text())["variables"]}
    want = {"const": dgp.intercept, "endowment": dgp.endowment, "age": dgp.age,
            "export_intensity": dgp.export, "phi": dgp.phi}
    assert max(abs(got[k] - want[k]) for k in want) < 1e-8


def test_fit_fe_reports_dropped_phi(capsys, tmp_path):
    csv = tmp_path / "c.csv"
    assert run(capsys, "panel", "--preset", "conglomerate", "--phi-shock-sd", "0",
               "--seed", "2", "--out", str(csv))[0] == 0
    code, text, _ = run(capsys, "fit", str(csv), "--estimator", "fe")
    assert code == 0
    assert "dropped: phi" in text
    assert "FixedEffectsWithin" in text


def test_fit_bad_csv(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("firm_id,period,growth,endowment,age,export_intensity,phi\n"
                   "F1,0,0.1,0.2,3,0.5,1.5\n")
    code, _, err = run(capsys, "fit", str(bad))
    assert code == 1
    assert "line 2" in err and "phi" in err
    assert run(capsys, "fit", str(tmp_path / "missing.csv"))[0] == 1


# --- replicate ----------------------------------------------------------------------------------------

def test_replicate_single_seed_passes(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, text, _ = run(capsys, "replicate", "--preset", "sme", "--seeds", "1",
                        "--start-seed", "1", "--out", str(out))
    assert code == 0
    assert "PASS" in text
    doc = json.loads(out.read_text())
    assert doc["seeds"][0]["seed"] == 1


def test_replicate_workers_do_not_change_output(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "replicate", "--preset", "conglomerate", "--seeds", "12", "--out", str(a))
    run(capsys, "replicate", "--preset", "conglomerate", "--seeds", "12", "--workers", "4",
        "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_replicate_unknown_preset(capsys):
    code, _, err = run(capsys, "replicate", "--preset", "nope")
    assert code == 1 and "unknown preset" in err


# --- help and entry point ----------------------------------------------------------------------------

@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help_documents_flags(capsys, cmd):
    code, out, _ = run(capsys, cmd, "--help")
    assert code == 0
    assert "--" in out or cmd == "fit"
    if cmd == "stability":
        assert "(default: 0.4)" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "forbearance", "game", "--pi-c", "1",
                           "--pi-d", "2", "--delta", "0.6", "--horizon", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("sustainable: true, delta*: 0.5")
