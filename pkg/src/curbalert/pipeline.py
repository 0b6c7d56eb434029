"""Real-time alert state machine over a stream of mask frames.

Each tick measures the closest curb, schedules proximity beeps by the current
interpulse interval, refreshes the orientation channel on its own clock
(sonification every 3 s, speech every 4 s, onset to onset) and mixes both
channels into the tick's stereo PCM. The two channels never influence each
other's timing. Frames with no usable curb leave the beep channel silent and
hold the last orientation estimate.

State is an immutable value threaded through ``tick``; identical frame
streams produce identical events and bit-identical audio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import audio
from .audio import BeepSpec, PcmClip, beep_params, pan_from_x, proximity_gains
from .geometry import (
    AlertZoneConfig,
    CameraModel,
    HorizonError,
    NO_ALERT,
    ZoneLevel,
    classify_distance,
    resolve_sector_center,
    row_to_ground_distance,
)
from .mask import (
    CurbMask,
    DegenerateContour,
    NoCurb,
    closest_pixel,
    contour_turn_angle,
    lower_contour,
    read_pgm,
    round_to_five,
    select_closest_curb,
)

__all__ = [
    "OrientationMode",
    "FrameInput",
    "BeepEvent",
    "SonificationEvent",
    "SpeechEvent",
    "AlertState",
    "TickOutput",
    "AlertPipeline",
    "event_log_lines",
    "run_offline",
]


class OrientationMode(str, Enum):
    SONIFICATION = "sonification"
    SPEECH = "speech"


REFRESH_PERIOD_S = {OrientationMode.SONIFICATION: 3.0, OrientationMode.SPEECH: 4.0}


@dataclass(frozen=True)
class FrameInput:
    timestamp_s: float
    mask: CurbMask


@dataclass(frozen=True)
class BeepEvent:
    t_s: float
    level: ZoneLevel
    spec: BeepSpec
    gains: tuple[float, float]
    pan: float
    distance_cm: float
    angle_deg: int | None


@dataclass(frozen=True)
class SonificationEvent:
    t_s: float
    angle_deg: int
    image_deg: int
    clip: PcmClip | None
    pan_start: float
    pan_end: float
    level: ZoneLevel
    distance_cm: float | None


@dataclass(frozen=True)
class SpeechEvent:
    t_s: float
    text: str
    angle_deg: int
    level: ZoneLevel
    distance_cm: float | None


Event = BeepEvent | SonificationEvent | SpeechEvent


def _empty_carry() -> np.ndarray:
    return np.zeros((0, 2))


@dataclass(frozen=True)
class AlertState:
    """Timers and held values between ticks; treat as opaque."""

    mode: OrientationMode
    current_level: ZoneLevel = NO_ALERT
    last_beep_emit_s: float = -math.inf
    last_orientation_emit_s: float = -math.inf
    last_orientation_deg: int | None = None
    last_pan_range: tuple[float, float] = (-1.0, 1.0)
    emitted_samples: int = 0
    carry: np.ndarray = field(default_factory=_empty_carry)


@dataclass(frozen=True)
class TickOutput:
    events: tuple[Event, ...]
    pcm: PcmClip


@dataclass(frozen=True)
class _Measurement:
    level: ZoneLevel = NO_ALERT
    distance_cm: float | None = None
    closest_col: int | None = None
    turn_deg: int | None = None
    pan_range: tuple[float, float] | None = None


class AlertPipeline:
    """Binds camera/zone configuration to the tick state machine.

    With ``synth_audio=False`` ticks emit events only and zero-length PCM;
    the experiment harness uses that mode.
    """

    def __init__(
        self,
        camera: CameraModel,
        zones: AlertZoneConfig,
        mode: OrientationMode = OrientationMode.SONIFICATION,
        sample_rate: int = audio.DEFAULT_SAMPLE_RATE,
        synth_audio: bool = True,
    ) -> None:
        self.camera = camera
        self.zones = zones
        self.mode = OrientationMode(mode)
        self.sample_rate = sample_rate
        self.synth_audio = synth_audio
        self.sector_center = resolve_sector_center(zones, camera)

    def initial_state(self) -> AlertState:
        return AlertState(mode=self.mode)

    def _measure(self, mask: CurbMask) -> _Measurement:
        if mask.is_empty():
            return _Measurement()
        try:
            instance = select_closest_curb(mask, self.sector_center)
            (col, row), _ = closest_pixel(mask, instance, self.sector_center)
            distance = row_to_ground_distance(self.camera, row)
        except (NoCurb, HorizonError):
            return _Measurement()
        level = classify_distance(self.zones, max(distance, 0.0))

        turn = pan_range = None
        try:
            contour = lower_contour(mask, instance)
            turn = round_to_five(contour_turn_angle(self.camera, contour))
            width = mask.width_px
            pan_range = (
                pan_from_x(float(contour.cols[0]), width),
                pan_from_x(float(contour.cols[-1]), width),
            )
        except (DegenerateContour, HorizonError):
            pass
        return _Measurement(level, distance, col, turn, pan_range)

    def tick(
        self, state: AlertState, frame: FrameInput, dt_s: float
    ) -> tuple[AlertState, TickOutput]:
        if dt_s <= 0:
            raise ValueError(f"dt_s must be positive, got {dt_s}")
        t = frame.timestamp_s
        m = self._measure(frame.mask)

        held_deg = m.turn_deg if m.turn_deg is not None else state.last_orientation_deg
        pan_range = m.pan_range if m.pan_range is not None else state.last_pan_range

        events: list[Event] = []
        clips: list[PcmClip] = []
        last_beep = state.last_beep_emit_s
        last_orient = state.last_orientation_emit_s

        if m.level.is_alert:
            spec = beep_params(m.level, m.distance_cm)
            if t - last_beep >= spec.ipi_s:
                width = frame.mask.width_px
                gains = proximity_gains(m.closest_col, width)
                events.append(
                    BeepEvent(
                        t_s=t,
                        level=m.level,
                        spec=spec,
                        gains=gains,
                        pan=pan_from_x(m.closest_col, width),
                        distance_cm=m.distance_cm,
                        angle_deg=held_deg,
                    )
                )
                last_beep = t
                if self.synth_audio:
                    clips.append(audio.spatialize(audio.synth_beep(spec, self.sample_rate), gains))

        if held_deg is not None and t - last_orient >= REFRESH_PERIOD_S[self.mode]:
            if self.mode is OrientationMode.SONIFICATION:
                image_deg = (-held_deg) % 180
                clip = None
                if self.synth_audio:
                    mono = audio.sonify_image(
                        audio.orientation_image(image_deg), sample_rate=self.sample_rate
                    )
                    clip = audio.spatialize(
                        mono, audio.pan_sweep_gains(mono.samples.size, *pan_range)
                    )
                    clips.append(clip)
                events.append(
                    SonificationEvent(
                        t_s=t,
                        angle_deg=held_deg,
                        image_deg=image_deg,
                        clip=clip,
                        pan_start=pan_range[0],
                        pan_end=pan_range[1],
                        level=m.level,
                        distance_cm=m.distance_cm,
                    )
                )
            else:
                events.append(
                    SpeechEvent(
                        t_s=t,
                        text=audio.speech_text(held_deg),
                        angle_deg=held_deg,
                        level=m.level,
                        distance_cm=m.distance_cm,
                    )
                )
            last_orient = t

        if self.synth_audio:
            end_sample = round((t + dt_s) * self.sample_rate)
            n_tick = max(end_sample - state.emitted_samples, 0)
            length = max([n_tick] + [c.n_frames for c in clips])
            buffer = np.zeros((length, 2))
            buffer[: state.carry.shape[0]] += state.carry[:length]
            if state.carry.shape[0] > length:
                # carry longer than this tick's need; keep the tail too
                buffer = np.vstack([buffer, state.carry[length:]])
            for clip in clips:
                buffer[: clip.n_frames] += clip.frames()
            pcm = PcmClip(self.sample_rate, 2, audio.soft_clip(buffer[:n_tick]).ravel())
            carry = buffer[n_tick:]
            emitted = state.emitted_samples + n_tick
        else:
            pcm = PcmClip(self.sample_rate, 2, np.zeros(0))
            carry = state.carry
            emitted = state.emitted_samples

        new_state = replace(
            state,
            current_level=m.level,
            last_beep_emit_s=last_beep,
            last_orientation_emit_s=last_orient,
            last_orientation_deg=held_deg,
            last_pan_range=pan_range,
            emitted_samples=emitted,
            carry=carry,
        )
        return new_state, TickOutput(events=tuple(events), pcm=pcm)


def _field(value, fmt: str) -> str:
    return "-" if value is None else fmt.format(value)


def event_log_lines(events) -> list[str]:
    """Tab-separated log: t_s, kind, zone, sublevel, distance_cm, angle_deg, pan."""
    lines = []
    for ev in events:
        if isinstance(ev, BeepEvent):
            kind, pan = "beep", ev.pan
        elif isinstance(ev, SonificationEvent):
            kind, pan = "sonification", ev.pan_start
        else:
            kind, pan = "speech", None
        lines.append(
            "\t".join(
                [
                    f"{ev.t_s:.3f}",
                    kind,
                    ev.level.zone.value,
                    _field(ev.level.sublevel, "{}"),
                    _field(ev.distance_cm, "{:.3f}"),
                    _field(ev.angle_deg, "{}"),
                    _field(pan, "{:.6f}"),
                ]
            )
        )
    return lines


def _frame_sort_key(path: Path):
    try:
        return (0, int(path.stem), "")
    except ValueError:
        return (1, 0, path.name)


@dataclass(frozen=True)
class OfflineResult:
    n_frames: int
    events: tuple[Event, ...]
    wav_path: Path
    log_path: Path


def run_offline(
    mask_dir: str | Path,
    out_wav: str | Path,
    out_log: str | Path,
    camera: CameraModel | None = None,
    zones: AlertZoneConfig | None = None,
    mode: OrientationMode = OrientationMode.SONIFICATION,
    tick_hz: float = 20.0,
    sample_rate: int = audio.DEFAULT_SAMPLE_RATE,
) -> OfflineResult:
    """Render a directory of PGM mask frames to a stereo WAV and an event log.

    Files are consumed in numeric order of their stem (lexicographic for
    non-numeric names), one frame per tick. Deterministic: the same directory
    and configuration always produce byte-identical outputs.
    """
    camera = camera or CameraModel()
    zones = zones or AlertZoneConfig()
    mask_dir = Path(mask_dir)
    if not mask_dir.is_dir():
        raise ValueError(f"mask directory does not exist: {mask_dir}")
    paths = sorted(mask_dir.glob("*.pgm"), key=_frame_sort_key)
    pipeline = AlertPipeline(camera, zones, mode, sample_rate=sample_rate)
    state = pipeline.initial_state()
    dt = 1.0 / tick_hz

    chunks: list[np.ndarray] = []
    events: list[Event] = []
    for k, path in enumerate(paths):
        frame = FrameInput(timestamp_s=k * dt, mask=read_pgm(path))
        state, out = pipeline.tick(state, frame, dt)
        events.extend(out.events)
        chunks.append(out.pcm.samples)

    samples = np.concatenate(chunks) if chunks else np.zeros(0)
    clip = PcmClip(sample_rate, 2, samples)
    audio.write_wav(clip, out_wav)
    lines = event_log_lines(events)
    Path(out_log).write_text("".join(line + "\n" for line in lines))
    return OfflineResult(len(paths), tuple(events), Path(out_wav), Path(out_log))
