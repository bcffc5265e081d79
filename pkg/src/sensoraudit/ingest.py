"""Loading, validation, trimming and windowing of multi-channel recordings.

Dataset layout on disk::

    <root>/<participant>/<session>/<class>_<trial>.csv   header: t,ch1,...,chM
    <root>/dataset.json                                  manifest

The manifest carries ``sampling_rate_hz``, ``class_names`` and
``channel_count``. Amplitudes are decimal text; any non-numeric or
non-finite cell rejects the file with its line number.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    DataFormatError,
    InconsistentChannelCountError,
    InvalidSpecError,
    MalformedRowError,
    MissingFileError,
    TrimExceedsLengthError,
    UnknownClassLabelError,
)

MANIFEST_NAME = "dataset.json"

# Control/rest state: ingested like any class, excluded from audits by default.
REST_CLASS = "rest"


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass
class Recording:
    samples: np.ndarray  # channels x T
    class_label: str
    trial_id: str
    session_id: str = ""
    participant_id: str = ""

    @property
    def channel_count(self) -> int:
        return int(self.samples.shape[0])

    @property
    def length(self) -> int:
        return int(self.samples.shape[1])

    def provenance(self) -> str:
        parts = [p for p in (self.participant_id, self.session_id, self.trial_id) if p]
        return "/".join(parts) if parts else self.trial_id


@dataclass
class RecordingSet:
    recordings: list[Recording]
    sampling_rate_hz: float
    class_names: list[str]
    channel_count: int


@dataclass
class WindowedSample:
    data: np.ndarray  # channels x W
    class_label: str
    source_trial: str
    start_index: int


@dataclass(frozen=True)
class SegmentationConfig:
    trim_head_ms: float = 600.0
    trim_tail_ms: float = 600.0
    window_len_samples: int = 400
    overlap_fraction: float = 0.5
    concat_trials_within_session: bool = True

    def __post_init__(self) -> None:
        if self.trim_head_ms < 0 or self.trim_tail_ms < 0:
            raise InvalidSpecError("trim amounts must be nonnegative")
        if self.window_len_samples < 1:
            raise InvalidSpecError("window_len_samples must be positive")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise InvalidSpecError("overlap_fraction must lie in [0, 1)")
        if self.stride < 1:
            raise InvalidSpecError(
                f"window {self.window_len_samples} with overlap "
                f"{self.overlap_fraction} rounds to a zero stride"
            )

    @property
    def stride(self) -> int:
        return round_half_up(self.window_len_samples * (1.0 - self.overlap_fraction))

    @classmethod
    def from_json_dict(cls, d: dict) -> "SegmentationConfig":
        return cls(**_checked_fields(cls, d))

    def to_json_dict(self) -> dict:
        return {
            "trim_head_ms": self.trim_head_ms,
            "trim_tail_ms": self.trim_tail_ms,
            "window_len_samples": self.window_len_samples,
            "overlap_fraction": self.overlap_fraction,
            "concat_trials_within_session": self.concat_trials_within_session,
        }


def _checked_fields(cls, d: dict) -> dict:
    known = set(cls.__dataclass_fields__)
    unknown = sorted(set(d) - known)
    if unknown:
        raise InvalidSpecError(f"unknown {cls.__name__} fields: {', '.join(unknown)}")
    return dict(d)


def validate_recording_set(rset: RecordingSet) -> None:
    if rset.sampling_rate_hz <= 0:
        raise DataFormatError("sampling_rate_hz must be positive")
    if rset.channel_count < 1:
        raise DataFormatError("channel_count must be positive")
    for rec in rset.recordings:
        if rec.channel_count != rset.channel_count:
            raise InconsistentChannelCountError(
                f"trial {rec.provenance()}: {rec.channel_count} channels, "
                f"expected {rset.channel_count}"
            )
        if rec.length < 1:
            raise DataFormatError(f"trial {rec.provenance()} is empty")
        if rec.class_label not in rset.class_names:
            raise UnknownClassLabelError(
                f"trial {rec.provenance()}: label {rec.class_label!r} not in manifest"
            )
        if not np.isfinite(rec.samples).all():
            raise DataFormatError(f"trial {rec.provenance()} contains non-finite values")


def load_dataset(root_path: str | Path, manifest_name: str = MANIFEST_NAME) -> RecordingSet:
    """Load every trial under ``root_path`` in lexicographic file order."""
    root = Path(root_path)
    if not root.is_dir():
        raise MissingFileError(f"dataset root not found: {root}")
    manifest_path = root / manifest_name
    if not manifest_path.is_file():
        raise MissingFileError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{manifest_path}: invalid JSON ({exc})") from exc
    for key in ("sampling_rate_hz", "class_names", "channel_count"):
        if key not in manifest:
            raise DataFormatError(f"{manifest_path}: missing key {key!r}")

    fs = float(manifest["sampling_rate_hz"])
    class_names = [str(c) for c in manifest["class_names"]]
    channel_count = int(manifest["channel_count"])

    recordings: list[Recording] = []
    for participant_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for session_dir in sorted(p for p in participant_dir.iterdir() if p.is_dir()):
            for path in sorted(session_dir.glob("*.csv")):
                recordings.append(
                    _load_trial_csv(
                        path,
                        channel_count,
                        class_names,
                        participant_dir.name,
                        session_dir.name,
                    )
                )

    rset = RecordingSet(recordings, fs, class_names, channel_count)
    validate_recording_set(rset)
    return rset


def _load_trial_csv(
    path: Path,
    channel_count: int,
    class_names: list[str],
    participant_id: str,
    session_id: str,
) -> Recording:
    stem = path.stem
    if "_" not in stem:
        raise DataFormatError(f"{path}: filename must be <class>_<trial>.csv")
    class_label, trial_id = stem.rsplit("_", 1)
    if class_label not in class_names:
        raise UnknownClassLabelError(f"{path}: class {class_label!r} not in manifest")

    rows: list[list[float]] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRowError(f"{path}:1: empty file") from None
        if len(header) != channel_count + 1:
            raise InconsistentChannelCountError(
                f"{path}: header has {len(header) - 1} channels, expected {channel_count}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != channel_count + 1:
                raise MalformedRowError(
                    f"{path}:{lineno}: {len(row)} fields, expected {channel_count + 1}"
                )
            try:
                values = [float(cell) for cell in row[1:]]
            except ValueError:
                raise MalformedRowError(f"{path}:{lineno}: non-numeric amplitude") from None
            if not all(math.isfinite(v) for v in values):
                raise MalformedRowError(f"{path}:{lineno}: non-finite amplitude")
            rows.append(values)
    if not rows:
        raise MalformedRowError(f"{path}:1: no data rows")

    samples = np.asarray(rows, dtype=float).T  # rows are timestamps
    return Recording(samples, class_label, trial_id, session_id, participant_id)


def trim(recording: Recording, cfg: SegmentationConfig, fs: float) -> Recording:
    """Drop the configured head/tail milliseconds, ms converted half-up."""
    head = round_half_up(cfg.trim_head_ms * fs / 1000.0)
    tail = round_half_up(cfg.trim_tail_ms * fs / 1000.0)
    remaining = recording.length - head - tail
    if remaining < 1:
        raise TrimExceedsLengthError(
            f"trial {recording.provenance()}: {recording.length} samples, "
            f"trim removes {head}+{tail}"
        )
    stop = recording.length - tail
    return replace(recording, samples=recording.samples[:, head:stop].copy())


def window(recording: Recording, cfg: SegmentationConfig) -> list[WindowedSample]:
    """Slide fixed windows over an (already trimmed) recording.

    Windows start at 0, stride, 2*stride, ... and only full windows are
    emitted, in ascending start order. An empty list is a valid result.
    """
    w = cfg.window_len_samples
    stride = cfg.stride
    source = recording.provenance()
    out: list[WindowedSample] = []
    start = 0
    while start + w <= recording.length:
        out.append(
            WindowedSample(
                data=recording.samples[:, start : start + w].copy(),
                class_label=recording.class_label,
                source_trial=source,
                start_index=start,
            )
        )
        start += stride
    return out


def segment(
    rset: RecordingSet,
    cfg: SegmentationConfig,
    classes: list[str] | None = None,
) -> list[WindowedSample]:
    """Trim and window a whole recording set.

    With ``concat_trials_within_session`` the trimmed trials sharing a
    (participant, session, class) key are concatenated, in file order,
    before windowing. Unit order follows first appearance, so output is
    deterministic for a given recording order.
    """
    wanted = set(rset.class_names if classes is None else classes)
    fs = rset.sampling_rate_hz
    trimmed = [trim(r, cfg, fs) for r in rset.recordings if r.class_label in wanted]

    if cfg.concat_trials_within_session:
        groups: dict[tuple[str, str, str], list[Recording]] = {}
        for rec in trimmed:
            key = (rec.participant_id, rec.session_id, rec.class_label)
            groups.setdefault(key, []).append(rec)
        units = [_concat_trials(members) for members in groups.values()]
    else:
        units = trimmed

    out: list[WindowedSample] = []
    for rec in units:
        out.extend(window(rec, cfg))
    return out


def _concat_trials(members: list[Recording]) -> Recording:
    if len(members) == 1:
        return members[0]
    first = members[0]
    joined = np.concatenate([m.samples for m in members], axis=1)
    trial_id = "+".join(m.trial_id for m in members)
    return replace(first, samples=joined, trial_id=trial_id)
