"""Synthetic recordings with controllable class structure.

Two per-channel signal families:

``tonic``
    Narrow-band activity (sinusoid plus a small smoothed-noise texture)
    whose amplitude is ``gain`` with a slow relative drift of magnitude
    ``amp_jitter``. Class structure comes from giving a channel
    different gains per class; the drift keeps within-class feature
    variance well sampled by every window.
``noise``
    Class-independent broadband activity whose amplitude and bandwidth
    drift on the window timescale (a lognormal envelope and a white/
    low-pass mix, both driven by slow noise). Window features are wide
    but identically distributed across classes, and windows far apart
    are effectively independent.

Generation is bit-reproducible for a fixed seed: draws happen in a fixed
class -> trial -> channel order from one ``numpy`` generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidSpecError
from .ingest import Recording, RecordingSet, SegmentationConfig

PROFILE_KINDS = ("tonic", "noise")


@dataclass(frozen=True)
class ChannelProfile:
    kind: str = "noise"
    gain: float = 1.0
    carrier_hz: float = 30.0  # tonic only
    am_depth: float = 0.25  # tonic: texture fraction added to the carrier
    amp_jitter: float = 0.08  # tonic: relative amplitude drift (window timescale)

    def __post_init__(self) -> None:
        if self.kind not in PROFILE_KINDS:
            raise InvalidSpecError(f"unknown profile kind {self.kind!r}")
        if self.gain <= 0:
            raise InvalidSpecError("profile gain must be positive")

    @classmethod
    def from_json_dict(cls, d: dict) -> "ChannelProfile":
        unknown = sorted(set(d) - set(cls.__dataclass_fields__))
        if unknown:
            raise InvalidSpecError(f"unknown profile fields: {', '.join(unknown)}")
        return cls(**d)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "gain": self.gain,
            "carrier_hz": self.carrier_hz,
            "am_depth": self.am_depth,
            "amp_jitter": self.amp_jitter,
        }


@dataclass
class ChannelSpec:
    default: ChannelProfile = field(default_factory=ChannelProfile)
    per_class: dict[str, ChannelProfile] = field(default_factory=dict)

    def profile(self, class_label: str) -> ChannelProfile:
        return self.per_class.get(class_label, self.default)

    @classmethod
    def from_json_dict(cls, d: dict) -> "ChannelSpec":
        unknown = sorted(set(d) - {"default", "classes"})
        if unknown:
            raise InvalidSpecError(f"unknown channel fields: {', '.join(unknown)}")
        default = ChannelProfile.from_json_dict(d.get("default", {}))
        per_class = {
            label: ChannelProfile.from_json_dict(p)
            for label, p in d.get("classes", {}).items()
        }
        return cls(default=default, per_class=per_class)

    def to_json_dict(self) -> dict:
        return {
            "default": self.default.to_json_dict(),
            "classes": {k: v.to_json_dict() for k, v in self.per_class.items()},
        }


@dataclass
class SyntheticSpec:
    class_names: list[str]
    channel_count: int
    sampling_rate_hz: float = 200.0
    windows_per_class: int = 80
    window_len_samples: int = 128
    overlap_fraction: float = 0.5
    trials_per_class: int = 4
    seed: int = 0
    channels: list[ChannelSpec] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.class_names:
            raise InvalidSpecError("class_names must be nonempty")
        if len(set(self.class_names)) != len(self.class_names):
            raise InvalidSpecError("class_names must be unique")
        for name, value in (
            ("channel_count", self.channel_count),
            ("windows_per_class", self.windows_per_class),
            ("window_len_samples", self.window_len_samples),
            ("trials_per_class", self.trials_per_class),
        ):
            if value < 1:
                raise InvalidSpecError(f"{name} must be positive")
        if self.sampling_rate_hz <= 0:
            raise InvalidSpecError("sampling_rate_hz must be positive")
        if not 0.0 <= self.overlap_fraction < 1.0:
            raise InvalidSpecError("overlap_fraction must lie in [0, 1)")
        if len(self.channels) > self.channel_count:
            raise InvalidSpecError("more channel specs than channel_count")
        known = set(self.class_names)
        for spec in self.channels:
            for label in spec.per_class:
                if label not in known:
                    raise InvalidSpecError(f"channel profile for unknown class {label!r}")
        # pad with default (noise) channels
        while len(self.channels) < self.channel_count:
            self.channels.append(ChannelSpec())
        # __post_init__ runs before stride validation is available; delegate
        self.segmentation()

    def segmentation(self) -> SegmentationConfig:
        """The natural segmentation for this spec: no trimming, own geometry."""
        return SegmentationConfig(
            trim_head_ms=0.0,
            trim_tail_ms=0.0,
            window_len_samples=self.window_len_samples,
            overlap_fraction=self.overlap_fraction,
            concat_trials_within_session=False,
        )

    @classmethod
    def from_json_dict(cls, d: dict) -> "SyntheticSpec":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(d) - known)
        if unknown:
            raise InvalidSpecError(f"unknown SyntheticSpec fields: {', '.join(unknown)}")
        d = dict(d)
        d["channels"] = [ChannelSpec.from_json_dict(c) for c in d.get("channels", [])]
        return cls(**d)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "SyntheticSpec":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            from .errors import MissingFileError

            raise MissingFileError(f"synthetic spec not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise InvalidSpecError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_json_dict(payload)

    def to_json_dict(self) -> dict:
        return {
            "class_names": list(self.class_names),
            "channel_count": self.channel_count,
            "sampling_rate_hz": self.sampling_rate_hz,
            "windows_per_class": self.windows_per_class,
            "window_len_samples": self.window_len_samples,
            "overlap_fraction": self.overlap_fraction,
            "trials_per_class": self.trials_per_class,
            "seed": self.seed,
            "channels": [c.to_json_dict() for c in self.channels],
        }


def _smooth(x: np.ndarray, kernel: int) -> np.ndarray:
    if kernel <= 1:
        return x
    taps = np.ones(kernel) / kernel
    return np.convolve(x, taps, mode="same")


def _unit_rms(x: np.ndarray) -> np.ndarray:
    power = float(np.sqrt(np.mean(np.square(x))))
    return x / power if power > 0 else x


def _render_tonic(
    rng: np.random.Generator, n: int, fs: float, p: ChannelProfile, modulation_len: int
) -> np.ndarray:
    phase = rng.uniform(0.0, 2.0 * math.pi)
    drift = _unit_rms(_smooth(rng.standard_normal(n), modulation_len))
    envelope = p.gain * np.maximum(1.0 + p.amp_jitter * drift, 0.05)
    t = np.arange(n) / fs
    carrier = np.sin(2.0 * math.pi * p.carrier_hz * t + phase)
    texture = _unit_rms(_smooth(rng.standard_normal(n), 5))
    return envelope * (carrier + p.am_depth * texture)


_ENV_LOG_SD = 0.5  # lognormal amplitude drift
_LOWPASS_KERNEL = 8  # slow component of the bandwidth mix


def _render_noise(
    rng: np.random.Generator, n: int, p: ChannelProfile, modulation_len: int
) -> np.ndarray:
    envelope = np.exp(_ENV_LOG_SD * _unit_rms(_smooth(rng.standard_normal(n), modulation_len)))
    mix = 1.0 / (1.0 + np.exp(-2.0 * _unit_rms(_smooth(rng.standard_normal(n), modulation_len))))
    broadband = _unit_rms(rng.standard_normal(n))
    lowpass = _unit_rms(_smooth(rng.standard_normal(n), _LOWPASS_KERNEL))
    return p.gain * envelope * ((1.0 - mix) * broadband + mix * lowpass)


def trial_length(spec: SyntheticSpec) -> int:
    """Samples per trial so that the per-class window target is met."""
    per_trial = math.ceil(spec.windows_per_class / spec.trials_per_class)
    stride = spec.segmentation().stride
    return spec.window_len_samples + (per_trial - 1) * stride


def generate_recordings(spec: SyntheticSpec, seed: int | None = None) -> RecordingSet:
    """Render the spec into a RecordingSet; deterministic for a fixed seed."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    n = trial_length(spec)
    recordings: list[Recording] = []
    for label in spec.class_names:
        for trial in range(spec.trials_per_class):
            channels = []
            for ch in range(spec.channel_count):
                profile = spec.channels[ch].profile(label)
                if profile.kind == "tonic":
                    channels.append(
                        _render_tonic(
                            rng, n, spec.sampling_rate_hz, profile, spec.window_len_samples
                        )
                    )
                else:
                    channels.append(
                        _render_noise(rng, n, profile, spec.window_len_samples)
                    )
            recordings.append(
                Recording(
                    samples=np.stack(channels),
                    class_label=label,
                    trial_id=f"t{trial:02d}",
                    session_id="s00",
                    participant_id="synthetic",
                )
            )
    return RecordingSet(
        recordings=recordings,
        sampling_rate_hz=spec.sampling_rate_hz,
        class_names=list(spec.class_names),
        channel_count=spec.channel_count,
    )
