"""Real-time tutoring sessions.

A session couples student control input, the simulator, the shadow
agent, and the tutor in one fixed-tick loop. Simulated time advances
exactly tick_hz * duration ticks regardless of wall-clock jitter; late
or missing inputs only change which control value is held. Three modes:

  live       student flies the built-in simulator through the wire protocol
  telemetry  states arrive as UDP packets from an external simulator
  replay     states and inputs come from a saved trajectory file

The session loop talks to the outside world only through an input
source (latest-control mailbox) and an event sink; the TCP server wraps
those around a socket. A slow client never stalls the tick loop: its
events are dropped oldest-first behind a bounded queue (counted), while
the session log always receives every event.
"""

from __future__ import annotations

import json
import socket
import threading
import time
from dataclasses import asdict, dataclass, field, replace

from .autopilot import TaskSpec, initial_state, n_ticks
from .evaluation import Trajectory, TrajectorySummary, load_trajectory
from .protocol import (
    ProtocolError,
    decode_message,
    encode_message,
    feedback_message,
    state_message,
)
from .simulator import AircraftState, ControlInput, SimParams, heading_error, step
from .tutor import ErrorFlag, FeedbackEvent, LineSpec, Tutor, TutorThresholds

MODE_LIVE = "live"
MODE_TELEMETRY = "telemetry"
MODE_REPLAY = "replay"

SESSION_LOG_FORMAT = "flighttutor-session-log-v1"
TELEMETRY_TIMEOUT = 2.0  # s without a packet before the session errors out


class SessionError(Exception):
    pass


@dataclass
class SessionConfig:
    task: TaskSpec
    thresholds: TutorThresholds = field(default_factory=TutorThresholds)
    sim: SimParams = field(default_factory=SimParams)
    mode: str = MODE_LIVE
    tick_hz: float = 20.0
    policy_path: str = ""
    log_path: str | None = None
    host: str = "127.0.0.1"
    port: int = 8070
    udp_port: int | None = None
    http_port: int | None = None
    static_dir: str | None = None
    trajectory_path: str | None = None
    real_time: bool = True

    def validate(self) -> None:
        if self.tick_hz <= 0:
            raise ValueError(f"tick_hz must be positive, got {self.tick_hz}")
        if self.mode not in (MODE_LIVE, MODE_TELEMETRY, MODE_REPLAY):
            raise ValueError(f"unknown session mode {self.mode!r}")
        if self.mode == MODE_LIVE and abs(self.tick_hz * self.sim.dt - 1.0) > 1e-9:
            raise ValueError(
                f"live mode requires tick_hz == 1/dt, got {self.tick_hz} with dt {self.sim.dt}"
            )
        if self.mode == MODE_TELEMETRY and self.udp_port is None:
            raise ValueError("telemetry mode requires udp_port")
        if self.mode == MODE_REPLAY and not self.trajectory_path:
            raise ValueError("replay mode requires trajectory_path")
        self.task.validate()
        self.thresholds.validate()
        self.sim.validate()


@dataclass
class SessionTiming:
    ticks: int = 0
    wall_elapsed: float = 0.0
    max_tick_lag: float = 0.0   # s the loop fell behind its schedule
    dropped_events: int = 0


@dataclass
class SessionLog:
    config: SessionConfig
    states: list[AircraftState] = field(default_factory=list)
    controls: list[ControlInput] = field(default_factory=list)
    events: list[FeedbackEvent] = field(default_factory=list)
    timing: SessionTiming = field(default_factory=SessionTiming)

    def summary(self) -> dict:
        task = self.config.task
        if self.states:
            alt = sum(abs(task.target_altitude - s.altitude) for s in self.states) / len(self.states)
            spd = sum(abs(task.target_airspeed - s.airspeed) for s in self.states) / len(self.states)
            final = heading_error(self.states[-1].heading, task.target_heading)
        else:
            alt = spd = final = 0.0
        return {
            "ticks": self.timing.ticks,
            "final_heading_error": final,
            "mean_abs_altitude_error": alt,
            "mean_abs_airspeed_error": spd,
            "flags_raised": sum(len(e.flags) for e in self.events),
            "dropped_events": self.timing.dropped_events,
        }


class InputSource:
    """Latest-value mailbox for student controls, plus session signals."""

    def poll(self) -> ControlInput | None:
        return None

    def stop_requested(self) -> bool:
        return False

    def is_closed(self) -> bool:
        return False


class MailboxInput(InputSource):
    """Thread-safe latest-control holder fed by a network reader."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._latest: ControlInput | None = None
        self._stop = False
        self._closed = False

    def put(self, control: ControlInput) -> None:
        with self._lock:
            self._latest = control

    def request_stop(self) -> None:
        self._stop = True

    def close(self) -> None:
        self._closed = True

    def poll(self) -> ControlInput | None:
        with self._lock:
            latest, self._latest = self._latest, None
        return latest

    def stop_requested(self) -> bool:
        return self._stop

    def is_closed(self) -> bool:
        return self._closed


class ScriptedInput(InputSource):
    """Deterministic input for tests: tick index -> control or None."""

    def __init__(self, fn) -> None:
        self._fn = fn
        self._tick = -1

    def poll(self) -> ControlInput | None:
        self._tick += 1
        return self._fn(self._tick)


class BoundedSink:
    """Drop-oldest event queue between the tick loop and a slow consumer."""

    def __init__(self, capacity: int = 256) -> None:
        self.capacity = capacity
        self.dropped = 0
        self._items: list[dict] = []
        self._cond = threading.Condition()
        self._closed = False

    def __call__(self, msg: dict) -> None:
        with self._cond:
            if len(self._items) >= self.capacity:
                self._items.pop(0)
                self.dropped += 1
            self._items.append(msg)
            self._cond.notify()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def is_closed(self) -> bool:
        with self._cond:
            return self._closed

    def get(self, timeout: float | None = None) -> dict | None:
        with self._cond:
            if not self._items and not self._closed:
                self._cond.wait(timeout)
            if self._items:
                return self._items.pop(0)
            return None

    def drain(self) -> list[dict]:
        with self._cond:
            items, self._items = self._items, []
            return items


def parse_telemetry(text: str) -> tuple[float, float, float, float, float, float, float, float]:
    """Parse one ASCII telemetry packet:
    TLM,<t>,<heading>,<altitude>,<airspeed>,<pitch_att>,<roll_att>,<yp>,<yr>"""
    parts = text.strip().split(",")
    if len(parts) != 9 or parts[0] != "TLM":
        raise ValueError(f"malformed telemetry packet: {text!r}")
    try:
        values = tuple(float(p) for p in parts[1:])
    except ValueError:
        raise ValueError(f"malformed telemetry packet: {text!r}") from None
    return values  # type: ignore[return-value]


class UdpTelemetrySource:
    """Receives telemetry packets on a UDP port and queues them."""

    def __init__(self, host: str, port: int):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((host, port))
        self._sock.settimeout(0.1)
        self.bound_port = self._sock.getsockname()[1]
        self.malformed = 0
        self._closed = False

    def get(self, timeout: float) -> tuple | None:
        deadline = time.monotonic() + timeout
        while not self._closed:
            try:
                data, _ = self._sock.recvfrom(4096)
            except socket.timeout:
                if time.monotonic() >= deadline:
                    return None
                continue
            except OSError:
                return None
            try:
                return parse_telemetry(data.decode("ascii", errors="replace"))
            except ValueError:
                self.malformed += 1
                continue
        return None

    def close(self) -> None:
        self._closed = True
        self._sock.close()


def _emit(sink, log: SessionLog, state: AircraftState, control: ControlInput,
          event: FeedbackEvent, task: TaskSpec) -> None:
    log.states.append(state)
    log.controls.append(control)
    log.events.append(event)
    if sink is not None:
        sink(state_message(state, task))
        sink(feedback_message(event))


def run_session(config: SessionConfig, input_source: InputSource, event_sink, agent,
                telemetry_source=None) -> SessionLog:
    """Run one session to completion and return its log. `agent` is a
    trained Policy or any (state, task) -> ControlInput callable."""
    config.validate()
    log = SessionLog(config=config)
    tutor = Tutor(agent, config.thresholds)
    start_wall = time.monotonic()

    if config.mode == MODE_LIVE:
        _run_live(config, input_source, event_sink, tutor, log)
    elif config.mode == MODE_TELEMETRY:
        _run_telemetry(config, input_source, event_sink, tutor, log, telemetry_source)
    else:
        _run_replay(config, input_source, event_sink, tutor, log)

    log.timing.wall_elapsed = time.monotonic() - start_wall
    log.timing.ticks = len(log.states)
    if isinstance(event_sink, BoundedSink):
        log.timing.dropped_events = event_sink.dropped
    if event_sink is not None:
        event_sink({"type": "end", "summary": log.summary()})
        if isinstance(event_sink, BoundedSink):
            # pushing the end summary itself may have evicted one more
            log.timing.dropped_events = event_sink.dropped
    if config.log_path:
        save_session_log(log, config.log_path)
    return log


def _pace(config: SessionConfig, start_wall: float, tick: int, log: SessionLog) -> None:
    if not config.real_time:
        return
    target = start_wall + tick / config.tick_hz
    delay = target - time.monotonic()
    if delay > 0:
        time.sleep(delay)
    elif -delay > log.timing.max_tick_lag:
        log.timing.max_tick_lag = -delay


def _run_live(config, input_source, sink, tutor: Tutor, log: SessionLog) -> None:
    task = config.task
    ticks = n_ticks(task.duration, config.sim.dt)
    state = initial_state(task)
    held = ControlInput(0.0, 0.0)
    start_wall = time.monotonic()
    for k in range(ticks):
        _pace(config, start_wall, k, log)
        if input_source.is_closed() or input_source.stop_requested():
            break
        latest = input_source.poll()
        if latest is not None:
            held = latest
        event = tutor.step(state, task, held)
        _emit(sink, log, state, held, event, task)
        state = step(state, held, config.sim)


def _run_telemetry(config, input_source, sink, tutor: Tutor, log: SessionLog,
                   source=None) -> None:
    task = config.task
    if source is None:
        source = UdpTelemetrySource(config.host, config.udp_port)
    prev: AircraftState | None = None
    try:
        while not (input_source.is_closed() or input_source.stop_requested()):
            packet = source.get(TELEMETRY_TIMEOUT)
            if packet is None:
                if sink is not None:
                    sink({"type": "error",
                          "message": f"telemetry timeout: no packet for {TELEMETRY_TIMEOUT} s"})
                break
            t, heading, altitude, airspeed, pitch, roll, yp, yr = packet
            if prev is not None and t > prev.t:
                pitch_rate = (pitch - prev.pitch_att) / (t - prev.t)
                roll_rate = (roll - prev.roll_att) / (t - prev.t)
            else:
                pitch_rate = roll_rate = 0.0
            state = AircraftState(
                t=t, x=0.0, y=0.0, altitude=altitude, airspeed=airspeed,
                heading=heading % 360.0, pitch_att=pitch, roll_att=roll,
                pitch_rate=pitch_rate, roll_rate=roll_rate,
            )
            control = ControlInput(yp, yr)
            event = tutor.step(state, task, control)
            _emit(sink, log, state, control, event, task)
            prev = state
            if t >= task.duration:
                break
    finally:
        source.close()


def _run_replay(config, input_source, sink, tutor: Tutor, log: SessionLog) -> None:
    traj, _params = load_trajectory(config.trajectory_path)
    task = traj.task
    # the log must record the task the tutor actually ran against, or a
    # later replay verification would recompute with the wrong targets
    log.config = replace(config, task=task)
    start_wall = time.monotonic()
    for k, (state, control) in enumerate(zip(traj.states, traj.controls)):
        _pace(config, start_wall, k, log)
        if input_source.is_closed() or input_source.stop_requested():
            break
        event = tutor.step(state, task, control)
        _emit(sink, log, state, control, event, task)


# ---------------------------------------------------------------------------
# Session log persistence and replay verification

def _config_to_json(config: SessionConfig) -> dict:
    return asdict(config)


def _config_from_json(obj: dict) -> SessionConfig:
    obj = dict(obj)
    obj["task"] = TaskSpec(**obj["task"])
    obj["thresholds"] = TutorThresholds(**obj["thresholds"])
    obj["sim"] = SimParams(**obj["sim"])
    return SessionConfig(**obj)


def save_session_log(log: SessionLog, path: str) -> None:
    header = {
        "format": SESSION_LOG_FORMAT,
        "config": _config_to_json(log.config),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for state, control, event in zip(log.states, log.controls, log.events):
            row = asdict(state)
            row["type"] = "state"
            row["yp"] = control.yoke_pitch
            row["yr"] = control.yoke_roll
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
            fh.write(encode_message(feedback_message(event)) + "\n")
        trailer = {"type": "end", "summary": log.summary(), "timing": asdict(log.timing)}
        fh.write(json.dumps(trailer, separators=(",", ":")) + "\n")


def _event_from_message(msg: dict) -> FeedbackEvent:
    return FeedbackEvent(
        t=float(msg["t"]),
        verification=msg["verification"],
        flags=[ErrorFlag(f["kind"], float(f["t"]), float(f["magnitude"]), float(f["threshold"]))
               for f in msg["flags"]],
        hint=msg["hint"],
        agent_line=LineSpec(**msg["agent_line"]),
        student_line=LineSpec(**msg["student_line"]),
        active=bool(msg["active"]),
    )


def load_session_log(path: str) -> SessionLog:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SessionError(f"{path}: empty session log")
    header = json.loads(lines[0])
    if header.get("format") != SESSION_LOG_FORMAT:
        raise SessionError(f"{path}: unknown log format {header.get('format')!r}")
    log = SessionLog(config=_config_from_json(header["config"]))
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SessionError(f"{path}: line {lineno}: {exc}") from None
        kind = row.get("type")
        if kind == "state":
            yp = row.pop("yp")
            yr = row.pop("yr")
            row.pop("type")
            log.states.append(AircraftState(**{k: float(v) for k, v in row.items()}))
            log.controls.append(ControlInput(float(yp), float(yr)))
        elif kind == "feedback":
            log.events.append(_event_from_message(row))
        elif kind == "end":
            timing = row.get("timing", {})
            log.timing = SessionTiming(**timing)
        else:
            raise SessionError(f"{path}: line {lineno}: unexpected row type {kind!r}")
    if len(log.states) != len(log.events):
        raise SessionError(f"{path}: {len(log.states)} state rows but {len(log.events)} feedback rows")
    return log


def replay_events(log: SessionLog, agent) -> list[FeedbackEvent]:
    """Re-run the tutor over the logged trajectory with fresh state."""
    tutor = Tutor(agent, log.config.thresholds)
    return [
        tutor.step(state, log.config.task, control)
        for state, control in zip(log.states, log.controls)
    ]


def verify_replay(log: SessionLog, agent) -> list[str]:
    """Field-for-field comparison of logged vs recomputed feedback.
    Returns a list of divergence descriptions (empty = deterministic)."""
    divergences: list[str] = []
    recomputed = replay_events(log, agent)
    for i, (logged, fresh) in enumerate(zip(log.events, recomputed)):
        if logged != fresh:
            divergences.append(f"tick {i} (t={logged.t}): logged {logged} != recomputed {fresh}")
    if len(recomputed) != len(log.events):
        divergences.append(f"event count mismatch: {len(log.events)} logged, {len(recomputed)} recomputed")
    return divergences


# ---------------------------------------------------------------------------
# Session server: one session per connection over any line transport

class TcpLineTransport:
    """Newline-delimited UTF-8 messages over a stream socket."""

    def __init__(self, conn: socket.socket):
        self._conn = conn
        self._buf = b""

    def recv_line(self) -> str | None:
        while b"\n" not in self._buf:
            try:
                chunk = self._conn.recv(4096)
            except OSError:
                return None
            if not chunk:
                return None
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8", errors="replace")

    def send_line(self, line: str) -> None:
        self._conn.sendall((line + "\n").encode("utf-8"))

    def close(self) -> None:
        try:
            self._conn.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._conn.close()


def serve_connection(transport, base_config: SessionConfig, agent,
                     stop_event: threading.Event | None = None,
                     session_index: int = 0) -> bool:
    """Drive one client connection: wait for start, run the session,
    stream events, close. Returns True if a session ran to completion."""
    stop_event = stop_event or threading.Event()
    mailbox = MailboxInput()
    sink = BoundedSink()
    started = threading.Event()
    start_fields: dict = {}

    def writer() -> None:
        try:
            while True:
                msg = sink.get(timeout=0.5)
                if msg is None:
                    if sink.is_closed() or mailbox.is_closed() or stop_event.is_set():
                        break
                    continue
                transport.send_line(encode_message(msg))
                if msg.get("type") == "end":
                    break
        except OSError:
            mailbox.close()

    def reader() -> None:
        try:
            while True:
                line = transport.recv_line()
                if line is None:
                    break
                _dispatch_client_line(line, mailbox, sink, started, start_fields)
        finally:
            mailbox.close()

    writer_thread = threading.Thread(target=writer, daemon=True)
    reader_thread = threading.Thread(target=reader, daemon=True)
    writer_thread.start()
    reader_thread.start()

    completed = False
    try:
        while not started.wait(timeout=0.2):
            if mailbox.is_closed() or stop_event.is_set():
                return False
        config = _apply_start_overrides(base_config, start_fields, session_index)
        run_session(config, mailbox, sink, agent)
        completed = True
    except Exception as exc:  # report to the client, never kill the server
        sink({"type": "error", "message": f"session failed: {exc}"})
    finally:
        sink.close()
        writer_thread.join(timeout=5.0)
        transport.close()
    return completed


def _dispatch_client_line(line: str, mailbox: MailboxInput, sink: BoundedSink,
                          started: threading.Event, start_fields: dict) -> None:
    if not line.strip():
        return
    try:
        msg = decode_message(line)
    except ProtocolError as exc:
        sink({"type": "error", "message": str(exc)})
        return
    mtype = msg["type"]
    if mtype == "control":
        mailbox.put(ControlInput(msg["yp"], msg["yr"]))
    elif mtype == "start":
        if started.is_set():
            sink({"type": "error", "message": "session already started"})
        else:
            start_fields.update({k: v for k, v in msg.items() if k != "type"})
            started.set()
    elif mtype == "stop":
        mailbox.request_stop()
    else:
        sink({"type": "error", "message": f"unexpected client message type: {mtype}"})


def _apply_start_overrides(base: SessionConfig, overrides: dict, session_index: int) -> SessionConfig:
    task = base.task
    if overrides:
        fields = asdict(task)
        for key in ("target_heading", "target_altitude", "target_airspeed",
                    "duration", "seed", "initial_heading"):
            if key in overrides:
                fields[key] = overrides[key]
        fields["seed"] = int(fields["seed"])
        task = TaskSpec(**fields)
    log_path = base.log_path
    if log_path and session_index:
        # concurrent sessions must not clobber one shared log file
        log_path = f"{log_path}.{session_index}"
    return replace(base, task=task, log_path=log_path)


class SessionServer:
    """TCP listener: one tutoring session per connection, any number of
    concurrent connections, each fully isolated."""

    def __init__(self, config: SessionConfig, agent):
        self.config = config
        self.agent = agent
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((config.host, config.port))
        self._sock.listen(8)
        self._sock.settimeout(0.2)
        self.bound_port = self._sock.getsockname()[1]
        self._stop = threading.Event()
        self._conn_count = 0
        self.sessions_run = 0

    def serve_forever(self) -> None:
        try:
            while not self._stop.is_set():
                try:
                    conn, _addr = self._sock.accept()
                except socket.timeout:
                    continue
                except OSError:
                    break
                conn.settimeout(None)
                index = self._conn_count
                self._conn_count += 1
                threading.Thread(target=self._handle, args=(conn, index), daemon=True).start()
        finally:
            self._sock.close()

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread

    def stop(self) -> None:
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass

    def _handle(self, conn: socket.socket, index: int) -> None:
        transport = TcpLineTransport(conn)
        if serve_connection(transport, self.config, self.agent, self._stop, index):
            self.sessions_run += 1
