"""Scripted expert: a cascaded PD autopilot flying straight-and-level.

Stands in for a qualified pilot when generating demonstration data.
The outer loops turn heading/altitude/airspeed error into a desired
bank and pitch attitude; the inner loops are PD on attitude, damped by
the achieved attitude rate. Everything is deterministic given the
state; recording noise is injected only at dataset-generation time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .simulator import (
    AircraftState,
    ControlInput,
    SimParams,
    clamp,
    heading_error,
    step,
    trimmed_state,
    wrap_heading,
)

DEFAULT_ALTITUDE = 1000.0  # m, trial start and hold altitude
TASK_OFFSET_RANGE = 30.0   # deg, goal heading drawn within +-30 of start


@dataclass
class TaskSpec:
    """One straight-and-level trial: capture target_heading, hold altitude
    and airspeed, for `duration` seconds."""

    target_heading: float
    target_altitude: float
    target_airspeed: float
    duration: float = 30.0
    seed: int = 0
    initial_heading: float = 0.0

    def validate(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"duration must be positive, got {self.duration}")


@dataclass
class ExpertGains:
    # Defaults are tuned so the demonstrated yoke never saturates at +-1
    # (max |yoke_roll| about 0.84 on the initial roll-in), which keeps the
    # demonstrations inside the range a tanh policy head can reproduce.
    k_hdg_to_bank: float = 2.0    # deg bank per deg heading error
    bank_limit_deg: float = 20.0
    k_roll_p: float = 0.04        # yoke per deg bank error
    k_roll_d: float = 0.01        # yoke per deg/s roll rate
    k_alt_to_pitch: float = 0.1   # deg pitch per m altitude error
    k_spd_to_pitch: float = 0.02  # deg pitch per m/s airspeed error
    k_pitch_p: float = 0.075      # yoke per deg pitch error
    k_pitch_d: float = 0.015      # yoke per deg/s pitch rate
    pitch_limit_deg: float = 15.0
    action_noise_std: float = 0.02  # std of recording noise per axis

    def validate(self, params: SimParams | None = None) -> None:
        for f in (
            "k_hdg_to_bank", "bank_limit_deg", "k_roll_p", "k_roll_d",
            "k_alt_to_pitch", "k_spd_to_pitch", "k_pitch_p", "k_pitch_d",
            "pitch_limit_deg", "action_noise_std",
        ):
            if getattr(self, f) < 0:
                raise ValueError(f"{f} must be >= 0")
        if params is not None and self.bank_limit_deg > params.roll_limit:
            raise ValueError("bank_limit_deg exceeds the simulator roll limit")


def expert_policy(state: AircraftState, task: TaskSpec, gains: ExpertGains) -> ControlInput:
    """Cascaded PD control law. Pure function of (state, task, gains)."""
    hdg_err = heading_error(state.heading, task.target_heading)
    desired_bank = clamp(
        gains.k_hdg_to_bank * hdg_err, -gains.bank_limit_deg, gains.bank_limit_deg
    )
    yoke_roll = (
        gains.k_roll_p * (desired_bank - state.roll_att)
        - gains.k_roll_d * state.roll_rate
    )

    desired_pitch = clamp(
        gains.k_alt_to_pitch * (task.target_altitude - state.altitude)
        + gains.k_spd_to_pitch * (task.target_airspeed - state.airspeed),
        -gains.pitch_limit_deg,
        gains.pitch_limit_deg,
    )
    yoke_pitch = (
        gains.k_pitch_p * (desired_pitch - state.pitch_att)
        - gains.k_pitch_d * state.pitch_rate
    )

    return ControlInput(yoke_pitch, yoke_roll)  # constructor clamps to [-1, 1]


def sample_task(
    initial_heading: float,
    rng_seed: int,
    target_altitude: float = DEFAULT_ALTITUDE,
    target_airspeed: float | None = None,
    duration: float = 30.0,
) -> TaskSpec:
    """Randomized goal heading within +-30 deg of the initial heading.

    Altitude and airspeed targets default to the trial's initial trimmed
    values, so the task is purely a heading capture plus hold.
    """
    if target_airspeed is None:
        target_airspeed = SimParams().v_trim
    rng = np.random.default_rng(rng_seed)
    offset = rng.uniform(-TASK_OFFSET_RANGE, TASK_OFFSET_RANGE)
    return TaskSpec(
        target_heading=wrap_heading(initial_heading + offset),
        target_altitude=target_altitude,
        target_airspeed=target_airspeed,
        duration=duration,
        seed=int(rng_seed),
        initial_heading=wrap_heading(initial_heading),
    )


def initial_state(task: TaskSpec) -> AircraftState:
    """Trimmed start state for a trial: level at the task's hold values."""
    return trimmed_state(task.initial_heading, task.target_altitude, task.target_airspeed)


def n_ticks(duration: float, dt: float) -> int:
    ticks = round(duration / dt)
    if ticks < 1:
        raise ValueError(f"duration {duration} shorter than one tick of {dt}")
    return ticks


def generate_demos(
    n_trials: int,
    duration: float,
    gains: ExpertGains,
    params: SimParams,
    seed: int,
):
    """Fly `n_trials` closed-loop expert trials and record every
    (state, action) pair. Each trial gets a fresh trimmed start at a
    random heading and a fresh task sampled from its own seed stream;
    the executed (and recorded) action is the PD output plus seeded
    Gaussian noise, clamped to the yoke range.

    Returns a Dataset (see flighttutor.data).
    """
    from .data import Dataset, DatasetMeta, Sample, featurize

    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    params.validate()
    gains.validate(params)

    ticks = n_ticks(duration, params.dt)
    samples: list[Sample] = []
    tasks: list[tuple[int, TaskSpec]] = []
    for trial in range(n_trials):
        init_rng = seeding.rng_for(seed, seeding.DEMO_INIT_HEADING, trial)
        init_heading = init_rng.uniform(0.0, 360.0)
        task = sample_task(
            init_heading,
            seeding.sub_seed(seed, seeding.DEMO_TASK, trial),
            target_airspeed=params.v_trim,
            duration=duration,
        )
        noise_rng = seeding.rng_for(seed, seeding.DEMO_NOISE, trial)
        state = initial_state(task)
        for _ in range(ticks):
            clean = expert_policy(state, task, gains)
            if gains.action_noise_std > 0:
                noise = noise_rng.normal(0.0, gains.action_noise_std, size=2)
                action = ControlInput(clean.yoke_pitch + noise[0], clean.yoke_roll + noise[1])
            else:
                action = clean
            samples.append(Sample(featurize(state, task), action, trial, state.t))
            state = step(state, action, params)
        tasks.append((trial, task))

    meta = DatasetMeta(sim=params, tasks=tasks)
    return Dataset(samples=samples, meta=meta)
