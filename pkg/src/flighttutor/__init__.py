"""flighttutor: an AI tutor for the straight-and-level flying maneuver.

A scripted expert demonstrates the maneuver on a simplified fixed-wing
simulator, an imitation policy is trained on the recorded trials, and a
tutoring engine then shadows a live student, flagging pitch/roll
deviations and emitting corrective feedback with a two-line overlay.
"""

__version__ = "0.1.0"

from .autopilot import ExpertGains, TaskSpec
from .simulator import AircraftState, ControlInput, SimParams, heading_error, step
from .tutor import FeedbackEvent, Tutor, TutorThresholds

__all__ = [
    "AircraftState",
    "ControlInput",
    "ExpertGains",
    "FeedbackEvent",
    "SimParams",
    "TaskSpec",
    "Tutor",
    "TutorThresholds",
    "heading_error",
    "step",
    "__version__",
]
