"""Audio synthesis and gain-law tests."""

import math
import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curbalert.audio import (
    BadAngle,
    BeepSpec,
    ChannelMismatch,
    NoAlert,
    PcmClip,
    beep_params,
    orientation_gains,
    orientation_image,
    pan_from_x,
    pan_sweep_gains,
    pcm16_bytes,
    proximity_gains,
    sonify_image,
    soft_clip,
    spatialize,
    speech_text,
    synth_beep,
    write_wav,
)
from curbalert.geometry import NO_ALERT, Zone, ZoneLevel

# Every printed cell of the proximity-beep table:
# (zone, sublevel) -> frequency, duration, ipi, reverb, loudness
TABLE = {
    (Zone.FAR, 1): (205.0, 0.07, 1.5, 40.0, 80.0),
    (Zone.FAR, 2): (220.0, 0.07, 1.3, 40.0, 80.0),
    (Zone.FAR, 3): (235.0, 0.07, 1.1, 40.0, 80.0),
    (Zone.FAR, 4): (250.0, 0.07, 0.9, 40.0, 80.0),
    (Zone.MEDIUM, 1): (300.0, 0.06, 0.8, 30.0, 100.0),
    (Zone.MEDIUM, 2): (350.0, 0.06, 0.65, 30.0, 100.0),
    (Zone.MEDIUM, 3): (400.0, 0.06, 0.5, 30.0, 100.0),
}


def peak_hz(samples, sample_rate=44100, nfft=65536):
    spec = np.abs(np.fft.rfft(samples * np.hanning(samples.size), nfft))
    k = int(spec.argmax())
    if 0 < k < spec.size - 1:
        a, b, c = spec[k - 1], spec[k], spec[k + 1]
        k = k + 0.5 * (a - c) / (a - 2 * b + c)
    return k * sample_rate / nfft


# --- beep parameters -----------------------------------------------------------


@pytest.mark.parametrize("key", sorted(TABLE, key=str))
def test_beep_params_table(key):
    zone, sub = key
    freq, dur, ipi, reverb, loud = TABLE[key]
    spec = beep_params(ZoneLevel(zone, sub))
    assert spec == BeepSpec(freq, dur, ipi, reverb, loud)


def test_beep_params_near_ramp():
    spec = beep_params(ZoneLevel(Zone.NEAR), 45.0)
    assert (spec.frequency_hz, spec.duration_s) == (500.0, 0.05)
    assert (spec.reverberance_pct, spec.loudness_pct) == (20.0, 120.0)
    assert spec.ipi_s == pytest.approx(0.3, abs=1e-12)
    assert beep_params(ZoneLevel(Zone.NEAR), 0.0).ipi_s == pytest.approx(0.2)
    assert beep_params(ZoneLevel(Zone.NEAR), 89.999).ipi_s == pytest.approx(0.4, abs=1e-4)
    assert beep_params(ZoneLevel(Zone.NEAR), 500.0).ipi_s == 0.4  # clamped


def test_beep_params_no_alert():
    with pytest.raises(NoAlert):
        beep_params(NO_ALERT)


# --- synthesis -------------------------------------------------------------------


def test_beep_spectrum_example():
    clip = synth_beep(BeepSpec(500.0, 0.05, 0.2, 0.0, 100.0))
    assert peak_hz(clip.samples) == pytest.approx(500.0, abs=5.0)


@pytest.mark.parametrize("key", sorted(TABLE, key=str) + [(Zone.NEAR, None)])
def test_beep_spectrum_all_rows(key):
    zone, sub = key
    spec = beep_params(ZoneLevel(zone, sub), 45.0)
    # dry path: the echo comb legitimately colors the composite spectrum
    dry = BeepSpec(spec.frequency_hz, spec.duration_s, spec.ipi_s, 0.0, spec.loudness_pct)
    assert peak_hz(synth_beep(dry).samples) == pytest.approx(spec.frequency_hz, abs=5.0)
    # with the echo active the peak stays within one comb period
    assert peak_hz(synth_beep(spec).samples) == pytest.approx(spec.frequency_hz, abs=9.0)


def test_beep_zero_loudness_silent():
    clip = synth_beep(BeepSpec(500.0, 0.05, 0.2, 20.0, 0.0))
    assert not clip.samples.any()


def test_beep_deterministic():
    spec = beep_params(ZoneLevel(Zone.FAR, 3))
    a, b = synth_beep(spec), synth_beep(spec)
    assert np.array_equal(a.samples, b.samples)


def test_beep_reverb_tail_extends_clip():
    dry = synth_beep(BeepSpec(300.0, 0.06, 0.8, 0.0, 100.0))
    wet = synth_beep(BeepSpec(300.0, 0.06, 0.8, 30.0, 100.0))
    assert dry.duration_s == pytest.approx(0.06, abs=1e-4)
    assert wet.duration_s > dry.duration_s
    assert np.abs(wet.samples).max() <= 1.0


def test_soft_clip_bounds():
    x = np.linspace(-5, 5, 1001)
    y = soft_clip(x)
    assert np.abs(y).max() <= 1.0  # saturates at, never beyond, full scale
    small = np.linspace(-0.5, 0.5, 101)
    assert np.array_equal(soft_clip(small), small)  # linear below the knee


# --- gain laws --------------------------------------------------------------------


def test_pan_from_x_examples():
    assert pan_from_x(0, 640) == -1.0
    assert pan_from_x(640, 640) == 1.0
    assert pan_from_x(320, 640) == 0.0
    assert pan_from_x(160, 640) == -0.5
    with pytest.raises(ValueError):
        pan_from_x(700, 640)


def test_orientation_gains_hand_values():
    assert orientation_gains(0.0) == pytest.approx((1 / math.sqrt(2),) * 2, abs=1e-9)
    assert orientation_gains(-1.0) == pytest.approx((2.0, 0.0), abs=1e-9)
    assert orientation_gains(1.0) == pytest.approx((0.0, 2.0), abs=1e-9)
    norm = math.sqrt(0.25 + 2.25)
    assert orientation_gains(0.5) == pytest.approx((0.25 / norm, 2.25 / norm), abs=1e-9)
    assert orientation_gains(0.5) == pytest.approx((0.158114, 1.423025), abs=1e-6)


@given(st.floats(min_value=-1.0, max_value=1.0))
@settings(max_examples=300, deadline=None)
def test_orientation_gains_identities(pan):
    left, right = orientation_gains(pan)
    norm = math.sqrt((1 - pan) ** 2 + (1 + pan) ** 2)
    # gains satisfy L*N = (1-p)^2 and R*N = (1+p)^2 exactly
    assert left * norm == pytest.approx((1 - pan) ** 2, abs=1e-12)
    assert right * norm == pytest.approx((1 + pan) ** 2, abs=1e-12)
    # left-right symmetry
    swapped = orientation_gains(-pan)
    assert swapped[0] == pytest.approx(right, abs=1e-12)
    assert swapped[1] == pytest.approx(left, abs=1e-12)


def test_proximity_gains_examples_and_sum():
    assert proximity_gains(0, 640) == (1.0, 0.0)
    assert proximity_gains(320, 640) == (0.5, 0.5)
    assert proximity_gains(480, 640) == (0.25, 0.75)
    rng = np.random.default_rng(123)
    for x in rng.uniform(0, 640, size=10_000):
        left, right = proximity_gains(float(x), 640)
        assert abs(left + right - 1.0) < 1e-12


# --- spatialize --------------------------------------------------------------------


def unit_clip(n=1000):
    return PcmClip(44100, 1, np.ones(n))


def test_spatialize_constant_gains():
    stereo = spatialize(unit_clip(), (1.0, 0.0))
    frames = stereo.frames()
    assert not frames[:, 1].any()
    assert np.array_equal(frames[:, 0], np.ones(1000))

    half = spatialize(unit_clip(), (0.5, 0.5))
    assert np.allclose(half.frames(), 0.5)


def test_spatialize_requires_mono():
    stereo = PcmClip(44100, 2, np.zeros(4))
    with pytest.raises(ChannelMismatch):
        spatialize(stereo, (1.0, 1.0))


def test_spatialize_ramp_rms():
    n = 44100
    mono = PcmClip(44100, 1, np.sin(2 * np.pi * 440 * np.arange(n) / 44100))
    stereo = spatialize(mono, pan_sweep_gains(n, -1.0, 1.0))
    frames = stereo.frames()
    tenth = n // 10

    def rms(x):
        return float(np.sqrt(np.mean(x**2)))

    assert rms(frames[:tenth, 0]) > rms(frames[-tenth:, 0])
    assert rms(frames[:tenth, 1]) < rms(frames[-tenth:, 1])


# --- orientation images --------------------------------------------------------------


def test_orientation_image_horizontal():
    img = orientation_image(0)
    rows = np.flatnonzero(img.any(axis=1))
    assert list(rows) == [32]
    cols = np.flatnonzero(img[32])
    # spans the full sweep up to one dash-off period at each edge
    assert cols[0] <= 8 and cols[-1] >= 167
    gaps = np.flatnonzero(img[32] == 0)
    assert gaps.size > 0  # dashed, not solid


def test_orientation_image_vertical_thick():
    img = orientation_image(90)
    cols = np.flatnonzero(img.any(axis=0))
    assert len(cols) == 3  # thickened near vertical
    assert list(cols) == [87, 88, 89]
    thin = orientation_image(45)
    assert thin.any()


def test_orientation_image_145_rises():
    img = orientation_image(145)
    cols = np.flatnonzero(img.any(axis=0))
    assert cols[0] <= 8 and cols[-1] >= 167
    # lower-left to upper-right: mean lit row falls as columns advance
    first = np.flatnonzero(img[:, cols[0]]).mean()
    last = np.flatnonzero(img[:, cols[-1]]).mean()
    assert first > last


def test_orientation_image_bad_angles():
    with pytest.raises(BadAngle):
        orientation_image(180)
    with pytest.raises(BadAngle):
        orientation_image(7)
    with pytest.raises(BadAngle):
        orientation_image(-5)


# --- sonification ---------------------------------------------------------------------


def window_centroids(clip, n_windows=8, win_s=0.1):
    x, sr = clip.samples, clip.sample_rate_hz
    n = round(win_s * sr)
    out = []
    for i in range(n_windows):
        w = x[i * n: (i + 1) * n]
        spec = np.abs(np.fft.rfft(w * np.hanning(w.size)))
        freqs = np.fft.rfftfreq(w.size, 1 / sr)
        out.append(float((spec * freqs).sum() / spec.sum()) if spec.sum() > 0 else 0.0)
    return out


def test_sonify_black_is_silence():
    clip = sonify_image(np.zeros((64, 176), np.uint8))
    assert not clip.samples.any()
    assert clip.duration_s == pytest.approx(0.8, abs=1 / 44100)


def test_sonify_duration_samples():
    clip = sonify_image(orientation_image(30))
    assert clip.samples.size == round(0.8 * 44100)
    odd = sonify_image(orientation_image(30), sample_rate=22051)
    assert abs(odd.samples.size - 0.8 * 22051) <= 1


def test_sonify_145_centroid_rises():
    cs = window_centroids(sonify_image(orientation_image(145)))
    assert all(b > a for a, b in zip(cs, cs[1:]))


def test_sonify_0_centroid_flat():
    cs = window_centroids(sonify_image(orientation_image(0)))
    mean = sum(cs) / len(cs)
    assert max(cs) - min(cs) < 0.05 * mean


def test_sonify_single_pixel_top_left():
    img = np.zeros((64, 176), np.uint8)
    img[0, 0] = 255
    clip = sonify_image(img)
    first = clip.samples[: round(0.1 * 44100)]
    rest = clip.samples[round(0.1 * 44100):]
    assert peak_hz(first) == pytest.approx(5000.0, abs=50.0)
    assert float((first**2).sum()) > 0
    assert float((rest**2).sum()) == pytest.approx(0.0, abs=1e-12)


def test_sonify_deterministic_and_bounded():
    a = sonify_image(orientation_image(65))
    b = sonify_image(orientation_image(65))
    assert np.array_equal(a.samples, b.samples)
    assert np.abs(a.samples).max() <= 1.0


# --- speech -----------------------------------------------------------------------------


def test_speech_text_examples():
    assert speech_text(30) == "30 left"
    assert speech_text(-45) == "45 right"
    assert speech_text(0) == "aligned"
    assert speech_text(90) == "90 left"
    with pytest.raises(BadAngle):
        speech_text(7)
    with pytest.raises(BadAngle):
        speech_text(95)


# --- WAV ---------------------------------------------------------------------------------


def test_wav_single_sample_bytes(tmp_path):
    path = tmp_path / "one.wav"
    write_wav(PcmClip(44100, 1, np.array([1.0])), path)
    data = path.read_bytes()
    assert data[:4] == b"RIFF" and data[8:12] == b"WAVE"
    assert data[-2:] == bytes([0xFF, 0x7F])


def test_wav_empty_clip(tmp_path):
    path = tmp_path / "empty.wav"
    write_wav(PcmClip(44100, 2, np.zeros(0)), path)
    with wave.open(str(path)) as w:
        assert w.getnframes() == 0
        assert w.getnchannels() == 2
        assert w.getsampwidth() == 2


def test_wav_stereo_data_size(tmp_path):
    n_frames = 321
    path = tmp_path / "st.wav"
    write_wav(PcmClip(44100, 2, np.zeros(2 * n_frames)), path)
    with wave.open(str(path)) as w:
        assert w.getnframes() == n_frames
        assert len(w.readframes(n_frames)) == 4 * n_frames


def test_pcm16_quantization():
    vals = pcm16_bytes(np.array([0.0, 1.0, -1.0, 0.5]))
    got = np.frombuffer(vals, dtype="<i2")
    assert list(got) == [0, 32767, -32767, 16384]


def test_pcmclip_validation():
    with pytest.raises(ValueError):
        PcmClip(44100, 2, np.zeros(3))
    with pytest.raises(ValueError):
        PcmClip(44100, 3, np.zeros(3))
