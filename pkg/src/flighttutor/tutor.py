"""Shadow-mode tutoring engine.

At every tick the trained agent is evaluated on the student's current
state (it never flies the aircraft), and the absolute pitch/roll yoke
differences are tested against user-defined thresholds:

    pitch deviation:  |p_agent - p_student| >= d1
    roll deviation:   |r_agent - r_student| >= d2

Raw threshold crossings flicker at tick rate, so a flag is raised only
after the violation has persisted for min_flag_duration seconds, and it
clears only once the difference drops below clear_hysteresis * threshold.
Each feedback event carries verification (on/off track), any newly
raised flags, a corrective hint, and the overlay geometry for the
two-line yoke-position display: each line is centered at (roll, pitch)
in the unit square and tilted by its roll value mapped onto +-45 deg.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .autopilot import TaskSpec
from .evaluation import PolicyFn, policy_fn_from
from .simulator import AircraftState, ControlInput

PITCH_DEVIATION = "PitchDeviation"
ROLL_DEVIATION = "RollDeviation"
ON_TRACK = "OnTrack"
OFF_TRACK = "OffTrack"

SLOPE_MAX_DEG = 45.0  # full right yoke tilts the overlay line to +45 deg


@dataclass
class TutorThresholds:
    d1: float = 0.15                 # pitch threshold, normalized yoke units
    d2: float = 0.20                 # roll threshold
    min_flag_duration: float = 0.5   # s a violation must persist before flagging
    clear_hysteresis: float = 0.8    # flag clears below this fraction of threshold

    def validate(self) -> None:
        if self.d1 < 0 or self.d2 < 0:
            raise ValueError("thresholds must be >= 0")
        if not (0.0 < self.clear_hysteresis <= 1.0):
            raise ValueError(f"clear_hysteresis must be in (0, 1], got {self.clear_hysteresis}")
        if self.min_flag_duration < 0:
            raise ValueError("min_flag_duration must be >= 0")


@dataclass
class ErrorFlag:
    kind: str          # PITCH_DEVIATION or ROLL_DEVIATION
    t: float
    magnitude: float   # |difference| at raise time
    threshold: float


@dataclass
class LineSpec:
    center_x: float    # roll command in [-1, 1]
    center_y: float    # pitch command in [-1, 1]
    slope_angle: float # deg, roll mapped linearly onto [-45, +45]


@dataclass
class FeedbackEvent:
    t: float
    verification: str            # ON_TRACK / OFF_TRACK
    flags: list[ErrorFlag]       # flags newly raised at this tick
    hint: str
    agent_line: LineSpec
    student_line: LineSpec
    active: bool                 # overlay shown: a raised flag has not yet cleared


def detect_errors(
    agent: ControlInput, student: ControlInput, th: TutorThresholds, t: float
) -> list[ErrorFlag]:
    """Stateless threshold test; persistence is applied by the Tutor."""
    flags: list[ErrorFlag] = []
    pitch_diff = abs(agent.yoke_pitch - student.yoke_pitch)
    if pitch_diff >= th.d1:
        flags.append(ErrorFlag(PITCH_DEVIATION, t, pitch_diff, th.d1))
    roll_diff = abs(agent.yoke_roll - student.yoke_roll)
    if roll_diff >= th.d2:
        flags.append(ErrorFlag(ROLL_DEVIATION, t, roll_diff, th.d2))
    return flags


def _line(control: ControlInput) -> LineSpec:
    return LineSpec(
        center_x=control.yoke_roll,
        center_y=control.yoke_pitch,
        slope_angle=control.yoke_roll * SLOPE_MAX_DEG,
    )


def _pitch_hint(agent: ControlInput, student: ControlInput) -> str:
    # direction is relative to the tutor's command, so the advice is right
    # whichever side of neutral both yokes are on
    if agent.yoke_pitch > student.yoke_pitch:
        return "Pull back toward the tutor's line to hold altitude and airspeed."
    return "Ease forward toward the tutor's line to hold altitude and airspeed."


def _roll_hint(agent: ControlInput, student: ControlInput) -> str:
    if agent.yoke_roll > student.yoke_roll:
        return "Roll right toward the tutor's line to track the target heading."
    return "Roll left toward the tutor's line: banking past it overshoots the target heading."


@dataclass
class _Channel:
    violating_since: float | None = None
    active: bool = False


class Tutor:
    """Per-session tutoring state machine (debounce timers and raised
    flags). One instance per session, driven by a single tick source."""

    def __init__(self, agent, thresholds: TutorThresholds | None = None):
        self.agent_fn: PolicyFn = policy_fn_from(agent)
        self.thresholds = thresholds if thresholds is not None else TutorThresholds()
        self.thresholds.validate()
        self._channels = {PITCH_DEVIATION: _Channel(), ROLL_DEVIATION: _Channel()}

    def reset(self) -> None:
        for ch in self._channels.values():
            ch.violating_since = None
            ch.active = False

    def _advance(self, kind: str, diff: float, threshold: float, t: float) -> ErrorFlag | None:
        th = self.thresholds
        ch = self._channels[kind]
        if ch.active:
            if diff < th.clear_hysteresis * threshold:
                ch.active = False
                ch.violating_since = None
            return None
        if diff >= threshold:
            if ch.violating_since is None:
                ch.violating_since = t
            # 1 ns slack so accumulated tick timestamps (10 * 0.05 s comes
            # out just under 0.5) cannot push the raise one tick late
            if t - ch.violating_since >= th.min_flag_duration - 1e-9:
                ch.active = True
                return ErrorFlag(kind, t, diff, threshold)
        else:
            ch.violating_since = None
        return None

    def step(
        self,
        state: AircraftState,
        task: TaskSpec,
        student: ControlInput,
        t: float | None = None,
    ) -> FeedbackEvent:
        """Evaluate the agent in shadow on the student's state and emit
        one feedback event for this tick."""
        now = state.t if t is None else t
        agent = self.agent_fn(state, task)

        raised: list[ErrorFlag] = []
        pitch_diff = abs(agent.yoke_pitch - student.yoke_pitch)
        roll_diff = abs(agent.yoke_roll - student.yoke_roll)
        flag = self._advance(PITCH_DEVIATION, pitch_diff, self.thresholds.d1, now)
        if flag is not None:
            raised.append(flag)
        flag = self._advance(ROLL_DEVIATION, roll_diff, self.thresholds.d2, now)
        if flag is not None:
            raised.append(flag)

        hints: list[str] = []
        if self._channels[PITCH_DEVIATION].active:
            hints.append(_pitch_hint(agent, student))
        if self._channels[ROLL_DEVIATION].active:
            hints.append(_roll_hint(agent, student))

        active = any(ch.active for ch in self._channels.values())
        return FeedbackEvent(
            t=now,
            verification=OFF_TRACK if active else ON_TRACK,
            flags=raised,
            hint=" ".join(hints),
            agent_line=_line(agent),
            student_line=_line(student),
            active=active,
        )
