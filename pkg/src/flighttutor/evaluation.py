"""Rollout evaluation: the average-heading-error metric, the deployment
gate, and synthetic flawed students for exercising the tutor.

A policy function takes (state, task) and returns a ControlInput; the
trained network, the scripted expert, and the synthesized students all
evaluate through the same rollout loop.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import seeding
from .autopilot import ExpertGains, TaskSpec, expert_policy, initial_state, n_ticks, sample_task
from .data import featurize
from .network import Policy, forward
from .simulator import AircraftState, ControlInput, SimParams, heading_error, step

PolicyFn = Callable[[AircraftState, TaskSpec], ControlInput]

TRAJECTORY_FORMAT = "flighttutor-trajectory-v1"

FLAW_PITCH_NEGLECT = "pitch-neglect"
FLAW_OVERSHOOTER = "overshooter"

# Deployment gates: a policy may teach once it flies unseen trials with
# at most this average heading error and stays this close to the expert's
# per-tick decisions.
GATE_MAX_AVG_HEADING_ERROR = 5.0   # deg
GATE_MAX_ACTION_DISTANCE = 0.05    # normalized yoke units


class RolloutError(Exception):
    pass


@dataclass
class TrajectorySummary:
    final_heading_error: float        # deg, signed, at t = duration
    mean_abs_altitude_error: float    # m, over all ticks
    mean_abs_airspeed_error: float    # m/s, over all ticks


@dataclass
class Trajectory:
    task: TaskSpec
    states: list[AircraftState]       # pre-step states, one per tick
    controls: list[ControlInput]
    final_state: AircraftState
    summary: TrajectorySummary

    def heading_errors(self) -> list[float]:
        return [heading_error(s.heading, self.task.target_heading) for s in self.states]


@dataclass
class EvalReport:
    n_trials: int
    seed: int
    avg_heading_error: float                 # deg, mean over trials of per-tick means
    per_trial_mean: list[float]
    error_series: list[list[float]]          # |heading error| per tick, per trial

    def validate(self) -> None:
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.avg_heading_error < 0:
            raise ValueError("avg_heading_error must be >= 0")


def policy_fn_from(policy) -> PolicyFn:
    """Accept a trained Policy or any (state, task) -> ControlInput callable."""
    if isinstance(policy, Policy):
        def fn(state: AircraftState, task: TaskSpec) -> ControlInput:
            return forward(policy, featurize(state, task))
        return fn
    if callable(policy):
        return policy
    raise TypeError(f"expected Policy or callable, got {type(policy)!r}")


def expert_fn(gains: ExpertGains | None = None) -> PolicyFn:
    g = gains if gains is not None else ExpertGains()
    return lambda state, task: expert_policy(state, task, g)


def rollout(policy_fn: PolicyFn, task: TaskSpec, duration: float, params: SimParams) -> Trajectory:
    """Closed-loop simulation from the task's trimmed start, recording
    every tick. Aborts if the policy emits a non-finite action."""
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    ticks = n_ticks(duration, params.dt)
    state = initial_state(task)
    states: list[AircraftState] = []
    controls: list[ControlInput] = []
    for k in range(ticks):
        action = policy_fn(state, task)
        if not (math.isfinite(action.yoke_pitch) and math.isfinite(action.yoke_roll)):
            raise RolloutError(f"policy emitted non-finite action at tick {k}")
        states.append(state)
        controls.append(action)
        state = step(state, action, params)

    alt_errs = [abs(task.target_altitude - s.altitude) for s in states]
    spd_errs = [abs(task.target_airspeed - s.airspeed) for s in states]
    summary = TrajectorySummary(
        final_heading_error=heading_error(state.heading, task.target_heading),
        mean_abs_altitude_error=sum(alt_errs) / len(alt_errs),
        mean_abs_airspeed_error=sum(spd_errs) / len(spd_errs),
    )
    return Trajectory(task=task, states=states, controls=controls, final_state=state, summary=summary)


def eval_task(seed: int, index: int, duration: float = 30.0, params: SimParams | None = None) -> TaskSpec:
    """Evaluation trial `index` for a master seed. Drawn from a stream
    disjoint from the demonstration streams, so these trials are unseen."""
    p = params if params is not None else SimParams()
    init_rng = seeding.rng_for(seed, seeding.EVAL_TASK, 2 * index)
    return sample_task(
        init_rng.uniform(0.0, 360.0),
        seeding.sub_seed(seed, seeding.EVAL_TASK, 2 * index + 1),
        target_airspeed=p.v_trim,
        duration=duration,
    )


def avg_heading_error(
    policy,
    n_trials: int = 10,
    seed: int = 0,
    duration: float = 30.0,
    params: SimParams | None = None,
) -> EvalReport:
    """Mean over trials of the per-tick mean absolute wrapped heading
    error, on randomized unseen tasks."""
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    p = params if params is not None else SimParams()
    fn = policy_fn_from(policy)
    series: list[list[float]] = []
    means: list[float] = []
    for i in range(n_trials):
        task = eval_task(seed, i, duration=duration, params=p)
        traj = rollout(fn, task, duration, p)
        errs = [abs(e) for e in traj.heading_errors()]
        series.append(errs)
        means.append(sum(errs) / len(errs))
    report = EvalReport(
        n_trials=n_trials,
        seed=seed,
        avg_heading_error=sum(means) / len(means),
        per_trial_mean=means,
        error_series=series,
    )
    report.validate()
    return report


def action_agreement(
    policy,
    n_trials: int = 10,
    seed: int = 0,
    duration: float = 30.0,
    params: SimParams | None = None,
    gains: ExpertGains | None = None,
) -> float:
    """Deployment-gate metric: the policy flies unseen trials and the
    expert is queried in shadow on the same states; returns the mean
    per-tick Euclidean distance between the two actions."""
    p = params if params is not None else SimParams()
    g = gains if gains is not None else ExpertGains()
    fn = policy_fn_from(policy)
    distances: list[float] = []
    for i in range(n_trials):
        task = eval_task(seed, i, duration=duration, params=p)
        traj = rollout(fn, task, duration, p)
        for state, action in zip(traj.states, traj.controls):
            ref = expert_policy(state, task, g)
            distances.append(
                math.hypot(action.yoke_pitch - ref.yoke_pitch, action.yoke_roll - ref.yoke_roll)
            )
    return sum(distances) / len(distances)


def synthesize_student(base: ExpertGains, flaw: str, severity: float, seed: int = 0) -> PolicyFn:
    """Perturbed expert imitating one of the two observed error types.

    pitch-neglect: scales the pitch channel by (1 - severity) and adds a
    seeded slow sinusoidal pitch drift, so altitude and airspeed wander.
    overshooter: multiplies the heading-to-bank gain by (1 + 2*severity)
    and fades out the roll damping term, so the capture overshoots the
    target heading. Both reduce to the expert exactly as severity -> 0.
    """
    if not (0.0 < severity <= 1.0):
        raise ValueError(f"severity must be in (0, 1], got {severity}")

    if flaw == FLAW_PITCH_NEGLECT:
        rng = seeding.rng_for(seed, seeding.STUDENT)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        amp = 0.4 * severity
        freq = 0.05  # Hz, slow drift

        def pitch_neglect(state: AircraftState, task: TaskSpec) -> ControlInput:
            a = expert_policy(state, task, base)
            drift = amp * math.sin(2.0 * math.pi * freq * state.t + phase)
            return ControlInput(a.yoke_pitch * (1.0 - severity) + drift, a.yoke_roll)

        return pitch_neglect

    if flaw == FLAW_OVERSHOOTER:
        from dataclasses import replace

        hot = replace(
            base,
            k_hdg_to_bank=base.k_hdg_to_bank * (1.0 + 2.0 * severity),
            k_roll_d=base.k_roll_d * (1.0 - severity),
        )
        return lambda state, task: expert_policy(state, task, hot)

    raise ValueError(f"unknown flaw {flaw!r} (expected {FLAW_PITCH_NEGLECT!r} or {FLAW_OVERSHOOTER!r})")


def _state_to_json(state: AircraftState) -> dict:
    return asdict(state)


def _state_from_json(obj: dict) -> AircraftState:
    return AircraftState(**{k: float(v) for k, v in obj.items()})


def save_trajectory(traj: Trajectory, params: SimParams, path: str) -> None:
    header = {
        "format": TRAJECTORY_FORMAT,
        "task": asdict(traj.task),
        "sim": asdict(params),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for state, control in zip(traj.states, traj.controls):
            row = _state_to_json(state)
            row["yp"] = control.yoke_pitch
            row["yr"] = control.yoke_roll
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
        final = _state_to_json(traj.final_state)
        final["yp"] = None
        final["yr"] = None
        fh.write(json.dumps(final, separators=(",", ":")) + "\n")


def load_trajectory(path: str) -> tuple[Trajectory, SimParams]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty trajectory file")
    header = json.loads(lines[0])
    if header.get("format") != TRAJECTORY_FORMAT:
        raise ValueError(f"{path}: unknown trajectory format {header.get('format')!r}")
    task = TaskSpec(**header["task"])
    params = SimParams(**header["sim"])

    states: list[AircraftState] = []
    controls: list[ControlInput] = []
    final_state: AircraftState | None = None
    for lineno, line in enumerate(lines[1:], start=2):
        row = json.loads(line)
        yp = row.pop("yp")
        yr = row.pop("yr")
        state = _state_from_json(row)
        if yp is None:
            final_state = state
        else:
            states.append(state)
            controls.append(ControlInput(float(yp), float(yr)))
    if final_state is None:
        raise ValueError(f"{path}: missing final state row")

    alt_errs = [abs(task.target_altitude - s.altitude) for s in states]
    spd_errs = [abs(task.target_airspeed - s.airspeed) for s in states]
    summary = TrajectorySummary(
        final_heading_error=heading_error(final_state.heading, task.target_heading),
        mean_abs_altitude_error=sum(alt_errs) / len(alt_errs) if alt_errs else 0.0,
        mean_abs_airspeed_error=sum(spd_errs) / len(spd_errs) if spd_errs else 0.0,
    )
    traj = Trajectory(task=task, states=states, controls=controls, final_state=final_state, summary=summary)
    return traj, params
