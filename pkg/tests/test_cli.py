import json

import pytest

from flighttutor import data
from flighttutor.cli import EXIT_DIVERGED, EXIT_GATE, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from flighttutor.config import ConfigError, load_config
from flighttutor.evaluation import load_trajectory


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def tiny_pipeline(tmp_path_factory):
    """gen-demos -> train -> artifacts, at toy scale for CLI plumbing tests."""
    root = tmp_path_factory.mktemp("cli")
    demos = root / "demos.jsonl"
    policy = root / "policy.json"
    code = run("gen-demos", "--trials", "3", "--duration", "4", "--seed", "7",
               "--out", str(demos))
    assert code == EXIT_OK
    code = run("train", "--data", str(demos), "--out", str(policy), "--seed", "7",
               "--set", "train.max_epochs=3", "--set", "train.eval_every=1",
               "--set", "eval.trials=2", "--set", "eval.duration=3")
    assert code == EXIT_OK
    return root, demos, policy


def test_gen_demos_writes_dataset(tiny_pipeline, capsys):
    _, demos, _ = tiny_pipeline
    ds = data.load(str(demos))
    assert len(ds) == 3 * 80
    assert len(ds.meta.tasks) == 3


def test_gen_demos_prints_sample_count(tmp_path, capsys):
    out = tmp_path / "d.jsonl"
    assert run("gen-demos", "--trials", "1", "--duration", "2", "--out", str(out)) == EXIT_OK
    printed = capsys.readouterr().out
    assert "wrote 40 samples" in printed
    assert "resolved configuration" in printed


def test_gen_demos_rejects_zero_duration(tmp_path, capsys):
    code = run("gen-demos", "--duration", "0", "--out", str(tmp_path / "x.jsonl"))
    assert code == EXIT_USAGE
    assert "--duration" in capsys.readouterr().err


def test_gen_demos_deterministic_bytes(tmp_path):
    a = tmp_path / "a.jsonl"
    b = tmp_path / "b.jsonl"
    assert run("gen-demos", "--trials", "2", "--duration", "2", "--seed", "3", "--out", str(a)) == EXIT_OK
    assert run("gen-demos", "--trials", "2", "--duration", "2", "--seed", "3", "--out", str(b)) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_train_writes_policy_curve_and_figure(tiny_pipeline):
    root, _, policy = tiny_pipeline
    assert policy.exists()
    assert (root / "policy.json.curve.tsv").exists()
    assert (root / "policy.json.curve.png").exists()
    header = (root / "policy.json.curve.tsv").read_text().splitlines()[0]
    assert header == "epoch\ttrain_loss\tval_loss\teval_heading_error"


def test_eval_gate_exit_codes(tiny_pipeline, tmp_path, capsys):
    _, _, policy = tiny_pipeline
    # toy policy: fails the real gates
    code = run("eval", "--policy", str(policy), "--trials", "2", "--seed", "1",
               "--set", "eval.duration=3")
    assert code == EXIT_GATE
    assert "FAIL" in capsys.readouterr().out
    # with gates opened wide it passes and writes the report + figure
    table = tmp_path / "report.tsv"
    code = run("eval", "--policy", str(policy), "--trials", "2", "--seed", "1",
               "--set", "eval.duration=3",
               "--set", "eval.max_avg_heading_error=180",
               "--set", "eval.max_action_distance=10")
    assert code == EXIT_OK
    code = run("eval", "--policy", str(policy), "--trials", "2", "--seed", "1",
               "--set", "eval.duration=3",
               "--set", "eval.max_avg_heading_error=180",
               "--set", "eval.max_action_distance=10",
               "--out", str(table))
    assert code == EXIT_OK
    assert table.read_text().splitlines()[0] == "trial\ttick\terror"
    assert (tmp_path / "report.tsv.png").exists()


def test_eval_byte_identical_reports(tiny_pipeline, tmp_path):
    _, _, policy = tiny_pipeline
    outs = []
    for name in ("r1.tsv", "r2.tsv"):
        path = tmp_path / name
        run("eval", "--policy", str(policy), "--trials", "2", "--seed", "5",
            "--set", "eval.duration=3",
            "--set", "eval.max_avg_heading_error=180",
            "--set", "eval.max_action_distance=10",
            "--out", str(path), "--no-fig")
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_eval_missing_policy_file(tmp_path, capsys):
    code = run("eval", "--policy", str(tmp_path / "nope.json"))
    assert code == EXIT_RUNTIME
    assert "error" in capsys.readouterr().err


def test_synth_student_and_replay_flow(tiny_pipeline, tmp_path, capsys):
    _, _, policy = tiny_pipeline
    traj = tmp_path / "student.traj"
    code = run("synth-student", "--flaw", "overshooter", "--severity", "0.8",
               "--seed", "2", "--duration", "8", "--out", str(traj))
    assert code == EXIT_OK
    back, _params = load_trajectory(str(traj))
    assert len(back.states) == 160

    code = run("synth-student", "--flaw", "overshooter", "--severity", "1.5",
               "--out", str(tmp_path / "n.traj"))
    assert code == EXIT_USAGE


def test_replay_verifies_and_detects_divergence(tiny_pipeline, tmp_path, capsys):
    root, _, policy = tiny_pipeline
    from flighttutor.evaluation import expert_fn, rollout, save_trajectory
    from flighttutor.autopilot import ExpertGains, TaskSpec
    from flighttutor.network import load_policy
    from flighttutor.session import SessionConfig, ScriptedInput, run_session
    from flighttutor.simulator import SimParams
    from flighttutor.tutor import TutorThresholds

    task = TaskSpec(target_heading=15.0, target_altitude=1000.0, target_airspeed=60.0,
                    duration=2.0, initial_heading=0.0)
    log_path = tmp_path / "session.log"
    config = SessionConfig(task=task, thresholds=TutorThresholds(), sim=SimParams(),
                           mode="live", tick_hz=20.0, real_time=False,
                           policy_path=str(policy), log_path=str(log_path))
    run_session(config, ScriptedInput(lambda k: None), None, load_policy(str(policy)))

    assert run("replay", "--log", str(log_path), "--fast") == EXIT_OK
    assert "deterministic" in capsys.readouterr().out

    # doctor one feedback line: hint text change must be caught
    lines = log_path.read_text().splitlines()
    idx = next(i for i, l in enumerate(lines) if '"type": "feedback"' in l or '"type":"feedback"' in l)
    lines[idx] = lines[idx].replace('"hint":""', '"hint":"doctored"', 1)
    log_path.write_text("\n".join(lines) + "\n")
    assert run("replay", "--log", str(log_path), "--fast") == EXIT_DIVERGED


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    code = run("gen-demos", "--out", str(tmp_path / "x.jsonl"),
               "--set", "train.warp_speed=9")
    assert code == EXIT_USAGE
    assert "warp_speed" in capsys.readouterr().err


def test_config_file_loading(tmp_path):
    ini = tmp_path / "tutor.ini"
    ini.write_text(
        "[sim]\n"
        "dt = 0.05\n"
        "v_trim = 65.0\n"
        "[tutor]\n"
        "d1 = 0.25\n"
        "[session]\n"
        "real_time = false\n"
        "duration = 12.0  # inline comment\n"
    )
    cfg = load_config(str(ini))
    assert cfg.sim.v_trim == 65.0
    assert cfg.tutor.d1 == 0.25
    assert cfg.session.real_time is False
    assert cfg.session.duration == 12.0

    with pytest.raises(ConfigError, match="unknown config key"):
        load_config(str(ini), overrides=["sim.wings=3"])
    with pytest.raises(ConfigError, match="unknown config section"):
        load_config(str(ini), overrides=["carburetor.heat=on"])
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.ini"))
    with pytest.raises(ConfigError, match="section.key=value"):
        load_config(None, overrides=["nonsense"])


def test_cli_usage_errors():
    assert run("no-such-command") == EXIT_USAGE
    assert run("train") == EXIT_USAGE  # missing required flags
