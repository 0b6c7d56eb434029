"""Sound generation: zone beeps, image sonification, speech text, panning.

Beep parameters follow the proximity table exactly: one row per far/medium
sub-level, a single near row whose interpulse interval shrinks linearly with
distance. Sonification sweeps a grayscale image left to right over 0.8 s,
pitch encoding verticality and amplitude encoding brightness. Two stereo gain
laws are provided: the squared/normalized pair used for the orientation
channel and the complementary linear pair used for proximity beeps.

Everything here is a pure function of its inputs; identical calls produce
bit-identical samples.
"""

from __future__ import annotations

import math
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Zone, ZoneLevel

__all__ = [
    "NoAlert",
    "ChannelMismatch",
    "BadAngle",
    "BeepSpec",
    "PcmClip",
    "beep_params",
    "synth_beep",
    "soft_clip",
    "pan_from_x",
    "orientation_gains",
    "proximity_gains",
    "pan_sweep_gains",
    "spatialize",
    "orientation_image",
    "sonify_image",
    "speech_text",
    "pcm16_bytes",
    "write_wav",
]

DEFAULT_SAMPLE_RATE = 44100

# Near-zone geometry the IPI ramp is anchored to.
NEAR_MAX_CM = 90.0

# Reverb: single feedback delay line, echoes below -60 dB are truncated.
_REVERB_DELAY_S = 0.060
_REVERB_FEEDBACK = 0.4
_REVERB_ECHOES = 8  # 0.4**8 ~= 6.5e-4

_ATTACK_RELEASE_S = 0.005
_SOFT_CLIP_KNEE = 0.8

_SONIFY_FREQ_LO_HZ = 500.0
_SONIFY_FREQ_HI_HZ = 5000.0

_DASH_ON_PX = 12
_DASH_OFF_PX = 8
_THICK_ANGLE_LO = 75
_THICK_ANGLE_HI = 105


class NoAlert(ValueError):
    """Distance falls outside every alert zone; nothing to sound."""


class ChannelMismatch(ValueError):
    """Operation expected a clip with a different channel count."""


class BadAngle(ValueError):
    """Angle is not a multiple of five degrees inside the supported range."""


@dataclass(frozen=True)
class BeepSpec:
    """One proximity-beep parameter row."""

    frequency_hz: float
    duration_s: float
    ipi_s: float
    reverberance_pct: float
    loudness_pct: float

    def __post_init__(self) -> None:
        if self.frequency_hz <= 0 or self.duration_s <= 0 or self.ipi_s <= 0:
            raise ValueError("frequency, duration and IPI must be positive")
        if self.reverberance_pct < 0 or self.loudness_pct < 0:
            raise ValueError("reverberance and loudness must be nonnegative")


# Far rows share duration 0.07 s, reverb 40 %, loudness 80 %; medium rows
# share 0.06 s / 30 % / 100 %. Frequencies step 15 Hz (far) and 50 Hz
# (medium) between sub-levels, IPIs step 0.2 s and 0.15 s.
_FAR_FREQ_IPI = {1: (205.0, 1.5), 2: (220.0, 1.3), 3: (235.0, 1.1), 4: (250.0, 0.9)}
_MEDIUM_FREQ_IPI = {1: (300.0, 0.8), 2: (350.0, 0.65), 3: (400.0, 0.5)}


def beep_params(level: ZoneLevel, distance_cm: float | None = None) -> BeepSpec:
    """Beep parameters for a classified distance.

    Far and medium sub-levels are fixed table rows. The near zone keeps one
    row whose IPI ramps linearly from 0.4 s at the zone boundary down to
    0.2 s at zero distance (``distance_cm`` required there).
    """
    if level.zone is Zone.NONE:
        raise NoAlert("no alert zone at this distance")
    if level.zone is Zone.FAR:
        freq, ipi = _FAR_FREQ_IPI[level.sublevel]
        return BeepSpec(freq, 0.07, ipi, 40.0, 80.0)
    if level.zone is Zone.MEDIUM:
        freq, ipi = _MEDIUM_FREQ_IPI[level.sublevel]
        return BeepSpec(freq, 0.06, ipi, 30.0, 100.0)
    if distance_cm is None:
        raise ValueError("near-zone beeps need the distance for the IPI ramp")
    ipi = 0.2 + (distance_cm / NEAR_MAX_CM) * 0.2
    ipi = min(max(ipi, 0.2), 0.4)
    return BeepSpec(500.0, 0.05, ipi, 20.0, 120.0)


@dataclass(frozen=True)
class PcmClip:
    """Sampled audio; samples are float amplitudes, interleaved when stereo."""

    sample_rate_hz: int
    channels: int
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.channels not in (1, 2):
            raise ValueError(f"channels must be 1 or 2, got {self.channels}")
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("samples must be a flat interleaved array")
        if arr.size % self.channels != 0:
            raise ValueError("sample count must divide evenly into frames")
        object.__setattr__(self, "samples", arr)

    @property
    def n_frames(self) -> int:
        return self.samples.size // self.channels

    @property
    def duration_s(self) -> float:
        return self.n_frames / self.sample_rate_hz

    def frames(self) -> np.ndarray:
        """View shaped (n_frames, channels)."""
        return self.samples.reshape(-1, self.channels)


def soft_clip(samples: np.ndarray) -> np.ndarray:
    """Keep |x| <= knee linear, squash the rest with tanh; output stays in (-1, 1)."""
    x = np.asarray(samples, dtype=np.float64)
    knee = _SOFT_CLIP_KNEE
    head = 1.0 - knee
    over = np.abs(x) > knee
    squashed = np.sign(x) * (knee + head * np.tanh((np.abs(x) - knee) / head))
    return np.where(over, squashed, x)


def synth_beep(spec: BeepSpec, sample_rate: int = DEFAULT_SAMPLE_RATE) -> PcmClip:
    """Render one beep: sine tone, 5 ms raised-cosine edges, echo, soft clip.

    Reverberance is a feedback-echo wet mix; the clip extends past the tone by
    the echo tail whenever the wet fraction is nonzero.
    """
    n = round(spec.duration_s * sample_rate)
    t = np.arange(n) / sample_rate
    tone = np.sin(2.0 * math.pi * spec.frequency_hz * t)

    edge = min(round(_ATTACK_RELEASE_S * sample_rate), n // 2)
    if edge > 0:
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(edge) / edge))
        tone[:edge] *= ramp
        tone[n - edge:] *= ramp[::-1]

    wet = spec.reverberance_pct / 100.0
    if wet > 0.0 and n > 0:
        delay = round(_REVERB_DELAY_S * sample_rate)
        out = np.zeros(n + _REVERB_ECHOES * delay)
        out[:n] = tone
        for k in range(1, _REVERB_ECHOES + 1):
            out[k * delay: k * delay + n] += wet * _REVERB_FEEDBACK ** (k - 1) * tone
    else:
        out = tone

    out = soft_clip(out * (spec.loudness_pct / 100.0))
    return PcmClip(sample_rate, 1, out)


def pan_from_x(x_pixel: float, frame_width: float) -> float:
    """Horizontal pixel position mapped to a pan in [-1, 1]."""
    if frame_width <= 0:
        raise ValueError("frame_width must be positive")
    if not 0.0 <= x_pixel <= frame_width:
        raise ValueError(f"x_pixel {x_pixel} outside [0, {frame_width}]")
    return (x_pixel / frame_width) * 2.0 - 1.0


def orientation_gains(pan):
    """Orientation-channel stereo gains for a pan position (scalar or array).

    L = (1-p)^2 / N, R = (1+p)^2 / N with N = sqrt((1-p)^2 + (1+p)^2). Note
    the gains deliberately reach 2.0 at full pan; this is the published law,
    not a constant-power pair.
    """
    p = np.asarray(pan, dtype=np.float64)
    lo, hi = (1.0 - p) ** 2, (1.0 + p) ** 2
    norm = np.sqrt(lo + hi)
    left, right = lo / norm, hi / norm
    if np.ndim(pan) == 0:
        return float(left), float(right)
    return left, right


def proximity_gains(x_closest_pixel: float, frame_width: float) -> tuple[float, float]:
    """Complementary beep gains: L = 1 - x/w, R = x/w; they sum to one."""
    if frame_width <= 0:
        raise ValueError("frame_width must be positive")
    if not 0.0 <= x_closest_pixel <= frame_width:
        raise ValueError(f"x {x_closest_pixel} outside [0, {frame_width}]")
    right = x_closest_pixel / frame_width
    return 1.0 - right, right


def pan_sweep_gains(n_samples: int, pan_start: float, pan_end: float):
    """Per-sample gain ramp for a pan moving linearly start -> end."""
    pans = np.linspace(pan_start, pan_end, n_samples)
    return orientation_gains(pans)


def spatialize(mono: PcmClip, gains) -> PcmClip:
    """Apply (left, right) gains — constants or per-sample ramps — to a mono clip."""
    if mono.channels != 1:
        raise ChannelMismatch(f"expected a mono clip, got {mono.channels} channels")
    left_gain, right_gain = gains
    left = mono.samples * left_gain
    right = mono.samples * right_gain
    interleaved = np.empty(mono.samples.size * 2)
    interleaved[0::2] = left
    interleaved[1::2] = right
    return PcmClip(mono.sample_rate_hz, 2, interleaved)


def orientation_image(
    rounded_deg: int, width: int = 176, height: int = 64
) -> np.ndarray:
    """Dashed white line on black at one of the 5-degree orientation steps.

    The angle is interpreted in aspect-normalized coordinates (the canvas
    treated as a square, then stretched), so every non-vertical line spans the
    full width and the sweep never goes silent at the edges; the index grows
    clockwise from the horizontal 0-degree line. Lines within 15 degrees of
    vertical are drawn 3 px thick instead of 1 px so their brief sweep moment
    stays audible.
    """
    if rounded_deg % 5 != 0 or not 0 <= rounded_deg <= 175:
        raise BadAngle(f"angle must be a multiple of 5 in [0, 175], got {rounded_deg}")
    img = np.zeros((height, width), dtype=np.uint8)
    phi = math.radians((180 - rounded_deg) % 180)
    dir_x, dir_y = math.cos(phi), math.sin(phi)
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    # pixel-space displacement per unit of normalized t (rows grow downward)
    dx = dir_x * (width - 1) / 2.0
    dy = -dir_y * (height - 1) / 2.0
    t_max = 1.0 / max(abs(dir_x), abs(dir_y))
    seg_px = t_max * math.hypot(dx, dy)

    step_count = max(int(math.ceil(seg_px / 0.25)), 1)
    ts = np.linspace(-t_max, t_max, 2 * step_count + 1)
    arclen = ts * math.hypot(dx, dy)
    period = _DASH_ON_PX + _DASH_OFF_PX
    lit = (arclen + _DASH_ON_PX / 2.0) % period < _DASH_ON_PX

    thick = 3 if _THICK_ANGLE_LO <= rounded_deg <= _THICK_ANGLE_HI else 1
    norm = math.hypot(dx, dy)
    perp = (-dy / norm, dx / norm)
    offsets = range(-(thick // 2), thick // 2 + 1)

    xs = cx + ts[lit] * dx
    ys = cy + ts[lit] * dy
    for k in offsets:
        # half-up rounding keeps thickness offsets on distinct pixels
        px = np.floor(xs + k * perp[0] + 0.5).astype(int)
        py = np.floor(ys + k * perp[1] + 0.5).astype(int)
        keep = (px >= 0) & (px < width) & (py >= 0) & (py < height)
        img[py[keep], px[keep]] = 255
    return img


def sonify_image(
    img: np.ndarray,
    clip_duration_s: float = 0.8,
    sample_rate: int = DEFAULT_SAMPLE_RATE,
) -> PcmClip:
    """Left-to-right sweep of a grayscale image as a mono clip.

    Each row contributes a sinusoid whose frequency maps exponentially from
    500 Hz (bottom row) to 5000 Hz (top row); its amplitude follows the row's
    brightness across columns, linearly cross-faded between adjacent columns.
    The result is normalized so the peak never exceeds one; an all-black image
    renders as silence.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if np.issubdtype(np.asarray(img).dtype, np.integer):
        arr = arr / 255.0
    height, width = arr.shape

    n = round(clip_duration_s * sample_rate)
    signal = np.zeros(n)
    if n == 0:
        return PcmClip(sample_rate, 1, signal)
    t = np.arange(n) / sample_rate
    col_centers = (np.arange(width) + 0.5) * (clip_duration_s / width)

    span = max(height - 1, 1)
    ratio = _SONIFY_FREQ_HI_HZ / _SONIFY_FREQ_LO_HZ
    for r in np.flatnonzero(arr.any(axis=1)):
        freq = _SONIFY_FREQ_LO_HZ * ratio ** ((height - 1 - r) / span)
        envelope = np.interp(t, col_centers, arr[r])
        signal += envelope * np.sin(2.0 * math.pi * freq * t)

    peak = np.abs(signal).max()
    if peak > 0.0:
        signal *= 0.9 / peak
    return PcmClip(sample_rate, 1, signal)


def speech_text(rounded_deg: int) -> str:
    """Spoken prompt for a signed turn angle: "30 left", "45 right", "aligned"."""
    if rounded_deg % 5 != 0 or not -90 <= rounded_deg <= 90:
        raise BadAngle(f"angle must be a multiple of 5 in [-90, 90], got {rounded_deg}")
    if rounded_deg == 0:
        return "aligned"
    side = "left" if rounded_deg > 0 else "right"
    return f"{abs(int(rounded_deg))} {side}"


def pcm16_bytes(samples: np.ndarray) -> bytes:
    """Quantize float samples to interleaved signed 16-bit little-endian."""
    q = np.rint(np.asarray(samples, dtype=np.float64) * 32767.0)
    return np.clip(q, -32768, 32767).astype("<i2").tobytes()


def write_wav(clip: PcmClip, path: str | Path) -> None:
    """Write a clip as RIFF/WAVE, PCM format 1, 16-bit signed little-endian."""
    with wave.open(str(path), "wb") as w:
        w.setnchannels(clip.channels)
        w.setsampwidth(2)
        w.setframerate(clip.sample_rate_hz)
        w.writeframes(pcm16_bytes(clip.samples))
