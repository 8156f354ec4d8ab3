"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them). The pipeline criteria share
one full default-scale run (25 trials x 30 s, default seeds) via a
session fixture; the determinism criterion repeats that run and
compares artifact bytes.
"""

import math
from contextlib import contextmanager

import numpy as np
import pytest

from flighttutor import data, seeding
from flighttutor.autopilot import ExpertGains, TaskSpec, generate_demos
from flighttutor.cli import EXIT_OK, main
from flighttutor.evaluation import (
    action_agreement,
    avg_heading_error,
    expert_fn,
    rollout,
    save_trajectory,
    synthesize_student,
)
from flighttutor.network import (
    bc_grad,
    bc_loss,
    forward_batch,
    init_policy,
    load_policy,
    squared_error_sum,
)
from flighttutor.data import Sample
from flighttutor.session import (
    ScriptedInput,
    SessionConfig,
    load_session_log,
    run_session,
    verify_replay,
)
from flighttutor.simulator import ControlInput, SimParams, heading_error, step, trimmed_state
from flighttutor.tutor import (
    PITCH_DEVIATION,
    ROLL_DEVIATION,
    Tutor,
    TutorThresholds,
    detect_errors,
)

GATE_HEADING = 5.0        # deg
GATE_AGREEMENT = 0.05     # normalized yoke units
TRAIN_LOSS_BOUND = 1e-3   # per-sample, regression bound from the pipeline run


@contextmanager
def criterion(number, label):
    try:
        yield
    except BaseException:
        print(f"[criterion {number}] FAIL - {label}")
        raise
    print(f"[criterion {number}] PASS - {label}")


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory):
    """Full default pipeline, once per test session: gen-demos -> train -> eval."""
    root = tmp_path_factory.mktemp("accept")
    paths = {
        "demos": root / "demos.jsonl",
        "policy": root / "policy.json",
        "curve": root / "policy.json.curve.tsv",
        "report": root / "report.tsv",
        "root": root,
    }
    assert main(["gen-demos", "--seed", "0", "--out", str(paths["demos"])]) == EXIT_OK
    assert main(["train", "--data", str(paths["demos"]), "--out", str(paths["policy"]),
                 "--seed", "0"]) == EXIT_OK
    paths["eval_code"] = main(["eval", "--policy", str(paths["policy"]), "--trials", "10",
                               "--seed", "0", "--out", str(paths["report"])])
    paths["dataset"] = data.load(str(paths["demos"]))
    paths["trained"] = load_policy(str(paths["policy"]))
    return paths


def test_criterion_1_loss_arithmetic():
    with criterion(1, "imitation loss arithmetic is exact"):
        # zero at a policy that reproduces its own recorded actions
        policy = init_policy(7)
        rng = np.random.default_rng(7)
        x = rng.normal(0, 1, size=(32, 8))
        out = forward_batch(policy, x)
        batch = [
            Sample(tuple(row), ControlInput(float(o[0]), float(o[1])), 0, k * 0.05)
            for k, (row, o) in enumerate(zip(x, out))
        ]
        assert bc_loss(policy, batch) == 0.0

        # the single-pair case: ||(0.1, 0.2) - (0, 0)||^2
        assert squared_error_sum(np.array([[0.1, 0.2]]), np.zeros((1, 2))) == 0.1**2 + 0.2**2

        # sum-linearity: duplicating the batch doubles the loss, exactly
        mixed = [
            Sample(tuple(rng.normal(0, 1, 8)),
                   ControlInput(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))),
                   0, k * 0.05)
            for k in range(17)
        ]
        assert bc_loss(policy, mixed + mixed) == 2.0 * bc_loss(policy, mixed)


def test_criterion_2_gradient_oracle():
    with criterion(2, "analytic gradient matches central finite differences"):
        h = 1e-5
        rng = np.random.default_rng(1234)
        worst = 0.0
        for _ in range(20):
            policy = init_policy(int(rng.integers(0, 1 << 31)))
            batch = [
                Sample(tuple(rng.normal(0, 1, 8)),
                       ControlInput(float(rng.uniform(-0.9, 0.9)), float(rng.uniform(-0.9, 0.9))),
                       0, k * 0.05)
                for k in range(4)
            ]
            analytic = []
            for dw, db in bc_grad(policy, batch):
                analytic.extend([dw, db])
            numeric = []
            for layer in range(len(policy.weights)):
                for arrays in (policy.weights, policy.biases):
                    arr = arrays[layer]
                    g = np.zeros_like(arr)
                    it = np.nditer(arr, flags=["multi_index"])
                    while not it.finished:
                        idx = it.multi_index
                        orig = arr[idx]
                        arr[idx] = orig + h
                        up = bc_loss(policy, batch)
                        arr[idx] = orig - h
                        down = bc_loss(policy, batch)
                        arr[idx] = orig
                        g[idx] = (up - down) / (2.0 * h)
                        it.iternext()
                    numeric.append(g)
            for ga, gn in zip(analytic, numeric):
                denom = np.maximum(np.maximum(np.abs(ga), np.abs(gn)), 1e-4)
                worst = max(worst, float(np.max(np.abs(ga - gn) / denom)))
        assert worst < 1e-4, f"max relative error {worst}"


def test_criterion_3_turn_rate_oracle():
    with criterion(3, "turn rate within 0.5% of (g/V)tan(bank) on the grid"):
        params = SimParams()
        zero = ControlInput(0.0, 0.0)
        for bank in (5.0, 15.0, 30.0):
            for speed in (40.0, 60.0, 80.0):
                analytic = math.degrees(params.g / speed * math.tan(math.radians(bank)))
                state = trimmed_state(0.0, 1000.0, speed)
                state.roll_att = bank
                nxt = step(state, zero, params)
                measured = heading_error(state.heading, nxt.heading) / params.dt
                assert abs(measured - analytic) <= 0.005 * analytic, (bank, speed)


def test_criterion_4_demonstration_protocol(pipeline):
    with criterion(4, "default demos: 25 trials x 30 s (12.5 min), offsets in +-30 deg, 15000 samples"):
        ds = pipeline["dataset"]
        assert len(ds.meta.tasks) == 25
        assert all(task.duration == 30.0 for _, task in ds.meta.tasks)
        total_min = sum(task.duration for _, task in ds.meta.tasks) / 60.0
        assert total_min == 12.5
        for _, task in ds.meta.tasks:
            offset = heading_error(task.initial_heading, task.target_heading)
            assert -30.0 <= offset <= 30.0
        assert ds.meta.sim.dt == 0.05
        assert len(ds) == 15_000


def test_criterion_5_training_pipeline(pipeline):
    with criterion(5, "trained policy: heading error < 5 deg, beats the constant-zero "
                      "baseline, action distance to expert < 0.05"):
        params = pipeline["dataset"].meta.sim
        policy = pipeline["trained"]

        train_loss = bc_loss(policy, pipeline["dataset"].samples) / len(pipeline["dataset"])
        assert train_loss < TRAIN_LOSS_BOUND, f"train loss {train_loss}"

        report = avg_heading_error(policy, n_trials=10, seed=0, params=params)
        assert report.avg_heading_error < GATE_HEADING, report.avg_heading_error

        baseline = avg_heading_error(lambda s, t: ControlInput(0.0, 0.0),
                                     n_trials=10, seed=0, params=params)
        print(f"    avg heading error {report.avg_heading_error:.3f} deg "
              f"vs constant-zero baseline {baseline.avg_heading_error:.3f} deg (expected ~15)")
        assert report.avg_heading_error < baseline.avg_heading_error

        agreement = action_agreement(policy, n_trials=10, seed=0, params=params,
                                     gains=ExpertGains())
        print(f"    action distance to expert {agreement:.4f}")
        assert agreement < GATE_AGREEMENT

        # the CLI eval gate agreed (exit 0)
        assert pipeline["eval_code"] == EXIT_OK


def test_criterion_6_threshold_predicates_brute_force():
    with criterion(6, "stateless deviation detection equals the threshold predicates "
                      "on 100k random triples, boundary included"):
        rng = np.random.default_rng(99)
        for i in range(100_000):
            agent = ControlInput(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
            if i % 10 == 0:
                # exact-boundary case: threshold equals the actual difference
                student = ControlInput(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
                th = TutorThresholds(d1=abs(agent.yoke_pitch - student.yoke_pitch),
                                     d2=abs(agent.yoke_roll - student.yoke_roll))
            else:
                student = ControlInput(float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)))
                th = TutorThresholds(d1=float(rng.uniform(0, 0.6)),
                                     d2=float(rng.uniform(0, 0.6)))
            got = {f.kind for f in detect_errors(agent, student, th, t=0.0)}
            want = set()
            if abs(agent.yoke_pitch - student.yoke_pitch) >= th.d1:
                want.add(PITCH_DEVIATION)
            if abs(agent.yoke_roll - student.yoke_roll) >= th.d2:
                want.add(ROLL_DEVIATION)
            assert got == want


def _flag_kinds(policy, student_fn, task, params):
    traj = rollout(student_fn, task, task.duration, params)
    tutor = Tutor(policy, TutorThresholds())
    kinds = []
    for state, control in zip(traj.states, traj.controls):
        kinds.extend(f.kind for f in tutor.step(state, task, control).flags)
    return kinds


def test_criterion_7_tutor_discrimination(pipeline):
    with criterion(7, "severity-1 students raise their own flag kind; expert replays raise none"):
        params = pipeline["dataset"].meta.sim
        policy = pipeline["trained"]
        gains = ExpertGains()
        task = TaskSpec(target_heading=25.0, target_altitude=1000.0, target_airspeed=60.0,
                        duration=30.0, initial_heading=0.0)

        overshoot = _flag_kinds(policy, synthesize_student(gains, "overshooter", 1.0, seed=3),
                                task, params)
        assert ROLL_DEVIATION in overshoot, overshoot

        neglect = _flag_kinds(policy, synthesize_student(gains, "pitch-neglect", 1.0, seed=3),
                              task, params)
        assert PITCH_DEVIATION in neglect, neglect

        for trial in range(3):
            from flighttutor.evaluation import eval_task

            expert_task = eval_task(17, trial, duration=30.0, params=params)
            assert _flag_kinds(policy, expert_fn(gains), expert_task, params) == []


def test_criterion_8_replay_determinism_and_protocol(pipeline, tmp_path):
    with criterion(8, "session replay reproduces logged feedback field-for-field; "
                      "protocol messages round-trip"):
        params = pipeline["dataset"].meta.sim
        policy = pipeline["trained"]
        gains = ExpertGains()
        task = TaskSpec(target_heading=25.0, target_altitude=1000.0, target_airspeed=60.0,
                        duration=30.0, initial_heading=0.0)

        student = synthesize_student(gains, "overshooter", 1.0, seed=3)
        traj = rollout(student, task, 30.0, params)
        traj_path = tmp_path / "student.traj"
        save_trajectory(traj, params, str(traj_path))

        log_path = tmp_path / "session.log"
        config = SessionConfig(task=task, thresholds=TutorThresholds(), sim=params,
                               mode="replay", tick_hz=20.0, real_time=False,
                               trajectory_path=str(traj_path),
                               policy_path=str(pipeline["policy"]), log_path=str(log_path))
        live = run_session(config, ScriptedInput(lambda k: None), None, policy)
        assert sum(len(e.flags) for e in live.events) >= 1

        logged = load_session_log(str(log_path))
        assert verify_replay(logged, policy) == []
        assert logged.events == live.events

        from test_protocol import random_messages
        from flighttutor.protocol import decode_message, encode_message

        rng = np.random.default_rng(5)
        for _ in range(20):
            for msg in random_messages(rng):
                assert decode_message(encode_message(msg)) == msg


def test_criterion_9_rerun_determinism(pipeline, tmp_path):
    with criterion(9, "re-running with the same seeds gives byte-identical dataset, "
                      "policy, and eval report files"):
        demos2 = tmp_path / "demos2.jsonl"
        policy2 = tmp_path / "policy2.json"
        report2 = tmp_path / "report2.tsv"
        assert main(["gen-demos", "--seed", "0", "--out", str(demos2)]) == EXIT_OK
        assert main(["train", "--data", str(demos2), "--out", str(policy2),
                     "--seed", "0", "--no-fig"]) == EXIT_OK
        code = main(["eval", "--policy", str(policy2), "--trials", "10", "--seed", "0",
                     "--out", str(report2), "--no-fig"])
        assert code == pipeline["eval_code"] == EXIT_OK

        assert demos2.read_bytes() == pipeline["demos"].read_bytes()
        policy_a = pipeline["policy"].read_bytes()
        assert policy2.read_bytes() == policy_a
        assert report2.read_bytes() == pipeline["report"].read_bytes()
