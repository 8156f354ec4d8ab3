"""Simplified fixed-wing flight dynamics.

Kinematic point-mass model with rate-commanded attitude, just enough
fidelity that straight-and-level errors (altitude/airspeed drift,
heading overshoot) are physically meaningful:

- yoke commands pitch/roll attitude RATE (clamped to attitude limits)
- heading rate follows the coordinated-turn law psi_dot = (g / V) tan(roll)
- climb rate h_dot = V sin(pitch)
- airspeed relaxes toward trim and trades speed for altitude:
  V_dot = thrust_accel - drag_coeff * (V - v_trim) - g sin(pitch)

Angles are stored in degrees at the API boundary (aviation convention);
all trigonometry is done in radians internally. Integration is forward
Euler at a fixed dt; attitude is updated first and the new attitude
drives the kinematic rates of the same step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


def wrap_heading(heading: float) -> float:
    """Wrap any real-valued heading into [0, 360)."""
    return heading % 360.0


def heading_error(current: float, target: float) -> float:
    """Signed difference (target - current) wrapped into (-180, +180].

    The +-180 tie breaks to +180 so the result is deterministic.
    """
    diff = (target - current) % 360.0
    if diff > 180.0:
        diff -= 360.0
    return diff


@dataclass
class ControlInput:
    """Yoke deflection in normalized units, clamped to [-1, 1] per axis.

    yoke_pitch: positive = pull (nose up)
    yoke_roll:  positive = right wing down
    """

    yoke_pitch: float
    yoke_roll: float

    def __post_init__(self) -> None:
        self.yoke_pitch = clamp(float(self.yoke_pitch), -1.0, 1.0)
        self.yoke_roll = clamp(float(self.yoke_roll), -1.0, 1.0)


@dataclass
class SimParams:
    dt: float = 0.05              # integration step (s); session tick = 1/dt
    g: float = 9.81               # m/s^2
    pitch_rate_gain: float = 20.0  # deg/s of pitch per unit yoke
    roll_rate_gain: float = 40.0   # deg/s of roll per unit yoke
    pitch_limit: float = 15.0     # deg
    roll_limit: float = 45.0      # deg
    v_trim: float = 60.0          # trim airspeed (m/s)
    v_min: float = 30.0           # stall floor (m/s)
    v_max: float = 90.0           # m/s
    drag_coeff: float = 0.1       # 1/s, pull of airspeed toward trim
    thrust_accel: float = 0.0     # m/s^2 excess thrust beyond trim balance

    def validate(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.v_min < self.v_trim < self.v_max):
            raise ValueError(
                f"need v_min < v_trim < v_max, got {self.v_min}, {self.v_trim}, {self.v_max}"
            )
        for name in ("pitch_rate_gain", "roll_rate_gain", "pitch_limit", "roll_limit", "drag_coeff"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class AircraftState:
    """Full kinematic state at one instant. x is east, y is north (m).

    heading is degrees in [0, 360), 0 = north, increasing clockwise.
    pitch_rate / roll_rate are the attitude rates achieved over the last
    step (deg/s), zero for a freshly trimmed state.
    """

    t: float
    x: float
    y: float
    altitude: float
    airspeed: float
    heading: float
    pitch_att: float
    roll_att: float
    pitch_rate: float = 0.0
    roll_rate: float = 0.0


def trimmed_state(heading: float, altitude: float, airspeed: float) -> AircraftState:
    """Wings-level state at the given heading with zero attitude rates."""
    return AircraftState(
        t=0.0,
        x=0.0,
        y=0.0,
        altitude=altitude,
        airspeed=airspeed,
        heading=wrap_heading(heading),
        pitch_att=0.0,
        roll_att=0.0,
    )


def step(state: AircraftState, control: ControlInput, params: SimParams) -> AircraftState:
    """Advance the state by one dt. Total and deterministic: identical
    inputs give a bit-identical successor state."""
    dt = params.dt

    pitch = clamp(
        state.pitch_att + control.yoke_pitch * params.pitch_rate_gain * dt,
        -params.pitch_limit,
        params.pitch_limit,
    )
    roll = clamp(
        state.roll_att + control.yoke_roll * params.roll_rate_gain * dt,
        -params.roll_limit,
        params.roll_limit,
    )
    pitch_rate = (pitch - state.pitch_att) / dt
    roll_rate = (roll - state.roll_att) / dt

    v = state.airspeed
    pitch_rad = math.radians(pitch)
    roll_rad = math.radians(roll)

    heading_rate = math.degrees(params.g / v * math.tan(roll_rad))  # deg/s
    heading = wrap_heading(state.heading + heading_rate * dt)

    climb_rate = v * math.sin(pitch_rad)
    altitude = max(0.0, state.altitude + climb_rate * dt)

    v_dot = (
        params.thrust_accel
        - params.drag_coeff * (v - params.v_trim)
        - params.g * math.sin(pitch_rad)
    )
    airspeed = clamp(v + v_dot * dt, params.v_min, params.v_max)

    ground_speed = v * math.cos(pitch_rad)
    heading_rad = math.radians(heading)
    x = state.x + ground_speed * math.sin(heading_rad) * dt
    y = state.y + ground_speed * math.cos(heading_rad) * dt

    return AircraftState(
        t=state.t + dt,
        x=x,
        y=y,
        altitude=altitude,
        airspeed=airspeed,
        heading=heading,
        pitch_att=pitch,
        roll_att=roll,
        pitch_rate=pitch_rate,
        roll_rate=roll_rate,
    )
