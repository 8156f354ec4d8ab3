"""Trajectory samples, featurization, persistence, and splitting.

A Sample is one (feature vector, recorded action) pair; the Dataset is
an ordered list of them plus per-trial task metadata. Files are UTF-8,
one JSON object per line: a single header line carrying the metadata,
then one line per sample with keys {trial, t, f, yp, yr}. Numbers are
serialized at full round-trip precision, so load(save(d)) == d.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .autopilot import TaskSpec
from .simulator import AircraftState, ControlInput, SimParams, heading_error

SCHEMA_VERSION = 1

# Feature schema "sl8-v1": the 8 inputs the policy observes, in order.
# Scales are fixed constants (not dataset statistics) so that a policy
# file is self-describing and datasets are reproducible bit-for-bit.
FEATURE_SCHEMA_ID = "sl8-v1"
FEATURE_NAMES = (
    "sin_heading_error",
    "cos_heading_error",
    "altitude_error",   # (target - altitude) / ALT_SCALE
    "airspeed_error",   # (target - airspeed) / SPD_SCALE
    "pitch_att",        # pitch / PITCH_SCALE
    "roll_att",         # roll / ROLL_SCALE
    "pitch_rate",       # deg/s * RATE_TICK
    "roll_rate",        # deg/s * RATE_TICK
)
N_FEATURES = len(FEATURE_NAMES)
ALT_SCALE = 100.0   # m
SPD_SCALE = 10.0    # m/s
PITCH_SCALE = 15.0  # deg, default pitch limit
ROLL_SCALE = 45.0   # deg, default roll limit
RATE_TICK = 0.05    # s, default tick length


class DatasetFormatError(Exception):
    """Raised on malformed or incompatible dataset files."""


FeatureVector = tuple[float, ...]


def featurize(state: AircraftState, task: TaskSpec) -> FeatureVector:
    """Fixed 8-component encoding of (state, task).

    The heading error goes through sin/cos so the wrap discontinuity at
    +-180 never reaches the network.
    """
    herr = math.radians(heading_error(state.heading, task.target_heading))
    return (
        math.sin(herr),
        math.cos(herr),
        (task.target_altitude - state.altitude) / ALT_SCALE,
        (task.target_airspeed - state.airspeed) / SPD_SCALE,
        state.pitch_att / PITCH_SCALE,
        state.roll_att / ROLL_SCALE,
        state.pitch_rate * RATE_TICK,
        state.roll_rate * RATE_TICK,
    )


@dataclass
class Sample:
    features: FeatureVector
    action: ControlInput
    trial_id: int
    t: float


@dataclass
class DatasetMeta:
    sim: SimParams
    tasks: list[tuple[int, TaskSpec]]  # (trial_id, task), ascending by trial_id
    schema_version: int = SCHEMA_VERSION
    feature_schema: str = FEATURE_SCHEMA_ID


@dataclass
class Dataset:
    samples: list[Sample]
    meta: DatasetMeta

    def __post_init__(self) -> None:
        last_trial = None
        last_t = None
        seen: set[int] = set()
        for s in self.samples:
            if len(s.features) != N_FEATURES:
                raise DatasetFormatError(
                    f"sample has {len(s.features)} features, expected {N_FEATURES}"
                )
            if s.trial_id != last_trial:
                if s.trial_id in seen:
                    raise DatasetFormatError(f"trial {s.trial_id} is not contiguous")
                seen.add(s.trial_id)
                last_trial = s.trial_id
                last_t = None
            if last_t is not None and s.t <= last_t:
                raise DatasetFormatError(
                    f"timestamps not strictly increasing in trial {s.trial_id}"
                )
            last_t = s.t

    def __len__(self) -> int:
        return len(self.samples)

    def trial_ids(self) -> list[int]:
        return [trial for trial, _ in self.meta.tasks]

    def task_for(self, trial_id: int) -> TaskSpec:
        for trial, task in self.meta.tasks:
            if trial == trial_id:
                return task
        raise KeyError(f"no task recorded for trial {trial_id}")

    def feature_matrix(self) -> np.ndarray:
        return np.array([s.features for s in self.samples], dtype=np.float64)

    def action_matrix(self) -> np.ndarray:
        return np.array(
            [(s.action.yoke_pitch, s.action.yoke_roll) for s in self.samples],
            dtype=np.float64,
        )


def _task_to_json(trial: int, task: TaskSpec) -> dict:
    d = asdict(task)
    d["trial"] = trial
    return d


def _task_from_json(obj: dict) -> tuple[int, TaskSpec]:
    trial = int(obj["trial"])
    task = TaskSpec(
        target_heading=float(obj["target_heading"]),
        target_altitude=float(obj["target_altitude"]),
        target_airspeed=float(obj["target_airspeed"]),
        duration=float(obj["duration"]),
        seed=int(obj["seed"]),
        initial_heading=float(obj["initial_heading"]),
    )
    return trial, task


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def save(dataset: Dataset, path: str) -> None:
    header = {
        "schema_version": dataset.meta.schema_version,
        "feature_schema": dataset.meta.feature_schema,
        "sim": asdict(dataset.meta.sim),
        "tasks": [_task_to_json(trial, task) for trial, task in dataset.meta.tasks],
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_dumps(header) + "\n")
        for s in dataset.samples:
            row = {
                "trial": s.trial_id,
                "t": s.t,
                "f": list(s.features),
                "yp": s.action.yoke_pitch,
                "yr": s.action.yoke_roll,
            }
            fh.write(_dumps(row) + "\n")


def load(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DatasetFormatError(f"{path}: empty file, expected a header line")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: line 1: malformed header: {exc}") from None
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DatasetFormatError(
            f"{path}: schema_version {version!r} not supported (expected {SCHEMA_VERSION})"
        )

    sim = SimParams(**header["sim"])
    tasks = [_task_from_json(t) for t in header["tasks"]]
    meta = DatasetMeta(
        sim=sim,
        tasks=tasks,
        schema_version=version,
        feature_schema=header.get("feature_schema", FEATURE_SCHEMA_ID),
    )

    samples: list[Sample] = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            row = json.loads(line)
            features = tuple(float(v) for v in row["f"])
            action = ControlInput(float(row["yp"]), float(row["yr"]))
            sample = Sample(features, action, int(row["trial"]), float(row["t"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(f"{path}: line {lineno}: malformed sample: {exc}") from None
        if not all(math.isfinite(v) for v in features):
            raise DatasetFormatError(f"{path}: line {lineno}: non-finite feature value")
        samples.append(sample)

    return Dataset(samples=samples, meta=meta)


def split(dataset: Dataset, val_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split by whole trials (never within a trial). Trial ids keep their
    original values in both halves so the union is exactly the input."""
    if not (0.0 <= val_fraction < 1.0):
        raise ValueError(f"val_fraction must be in [0, 1), got {val_fraction}")

    ids = dataset.trial_ids()
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ids))
    n_val = int(round(len(ids) * val_fraction))
    val_ids = {ids[i] for i in perm[:n_val]}

    def subset(keep: set[int]) -> Dataset:
        return Dataset(
            samples=[s for s in dataset.samples if s.trial_id in keep],
            meta=DatasetMeta(
                sim=dataset.meta.sim,
                tasks=[(trial, task) for trial, task in dataset.meta.tasks if trial in keep],
                schema_version=dataset.meta.schema_version,
                feature_schema=dataset.meta.feature_schema,
            ),
        )

    train_ids = {i for i in ids if i not in val_ids}
    return subset(train_ids), subset(val_ids)
