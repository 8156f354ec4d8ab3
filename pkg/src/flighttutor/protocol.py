"""Line protocol between the session server and its clients.

Every message is a single-line JSON object with a "type" field,
newline-delimited on a full-duplex connection.

client -> server:  control {t, yp, yr} | start {task overrides} | stop {}
server -> client:  state {t, heading, altitude, airspeed, pitch_att,
                   roll_att, target_heading} | feedback {...} |
                   end {summary} | error {message}

Unknown fields are ignored; unknown types are rejected with an error
naming the type; out-of-range yoke values are accepted but clamped with
a warning field set. decode(encode(m)) == m for any valid message.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict

from .autopilot import TaskSpec
from .simulator import AircraftState
from .tutor import FeedbackEvent


class ProtocolError(Exception):
    pass


_NUM = "number"
_STR = "string"
_BOOL = "bool"
_LIST = "list"
_OBJ = "object"

# type -> (required fields, optional fields)
_FIELDS: dict[str, tuple[dict[str, str], dict[str, str]]] = {
    "control": ({"t": _NUM, "yp": _NUM, "yr": _NUM}, {"warning": _STR}),
    "start": (
        {},
        {
            "target_heading": _NUM,
            "target_altitude": _NUM,
            "target_airspeed": _NUM,
            "duration": _NUM,
            "seed": _NUM,
            "initial_heading": _NUM,
        },
    ),
    "stop": ({}, {}),
    "state": (
        {
            "t": _NUM,
            "heading": _NUM,
            "altitude": _NUM,
            "airspeed": _NUM,
            "pitch_att": _NUM,
            "roll_att": _NUM,
            "target_heading": _NUM,
        },
        {},
    ),
    "feedback": (
        {
            "t": _NUM,
            "verification": _STR,
            "active": _BOOL,
            "hint": _STR,
            "flags": _LIST,
            "agent_line": _OBJ,
            "student_line": _OBJ,
        },
        {},
    ),
    "end": ({"summary": _OBJ}, {}),
    "error": ({"message": _STR}, {}),
}


def _check(value, kind: str, name: str, mtype: str):
    ok = {
        _NUM: lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        _STR: lambda v: isinstance(v, str),
        _BOOL: lambda v: isinstance(v, bool),
        _LIST: lambda v: isinstance(v, list),
        _OBJ: lambda v: isinstance(v, dict),
    }[kind]
    if not ok(value):
        raise ProtocolError(f"{mtype}.{name}: expected {kind}, got {type(value).__name__}")
    if kind == _NUM and not math.isfinite(value):
        raise ProtocolError(f"{mtype}.{name}: non-finite number")
    return value


def _validated(msg: dict) -> dict:
    mtype = msg.get("type")
    if not isinstance(mtype, str):
        raise ProtocolError("message has no type field")
    if mtype not in _FIELDS:
        raise ProtocolError(f"unknown message type: {mtype}")
    required, optional = _FIELDS[mtype]
    out: dict = {"type": mtype}
    for name, kind in required.items():
        if name not in msg:
            raise ProtocolError(f"{mtype}: missing field {name}")
        out[name] = _check(msg[name], kind, name, mtype)
    for name, kind in optional.items():
        if name in msg:
            out[name] = _check(msg[name], kind, name, mtype)
    # anything not in the field tables is ignored
    return out


def encode_message(msg: dict) -> str:
    """Validate and serialize to one line (no trailing newline)."""
    out = _validated(msg)
    return json.dumps(out, separators=(",", ":"), allow_nan=False)


def decode_message(line: str) -> dict:
    """Parse and validate one line. Control yoke values outside [-1, 1]
    are clamped and flagged with a warning field."""
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed message line: {exc}") from None
    if not isinstance(msg, dict):
        raise ProtocolError("message is not an object")
    out = _validated(msg)
    if out["type"] == "control":
        clamped = []
        for axis in ("yp", "yr"):
            v = out[axis]
            if v < -1.0 or v > 1.0:
                out[axis] = -1.0 if v < -1.0 else 1.0
                clamped.append(axis)
        if clamped:
            out["warning"] = f"clamped out-of-range yoke value: {', '.join(clamped)}"
    return out


def state_message(state: AircraftState, task: TaskSpec) -> dict:
    return {
        "type": "state",
        "t": state.t,
        "heading": state.heading,
        "altitude": state.altitude,
        "airspeed": state.airspeed,
        "pitch_att": state.pitch_att,
        "roll_att": state.roll_att,
        "target_heading": task.target_heading,
    }


def feedback_message(event: FeedbackEvent) -> dict:
    return {
        "type": "feedback",
        "t": event.t,
        "verification": event.verification,
        "active": event.active,
        "hint": event.hint,
        "flags": [asdict(f) for f in event.flags],
        "agent_line": asdict(event.agent_line),
        "student_line": asdict(event.student_line),
    }
