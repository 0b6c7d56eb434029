"""Duplex session service: JSON control messages plus binary audio frames.

One interactive session at a time. The tick loop owns the world and the alert
pipeline: each tick applies the latest client input, advances the simulation,
runs a pipeline tick, then emits a state message and the tick's mixed PCM as
a binary frame (little-endian u32 seq, u32 sample_rate, u16 channels,
u16 bits_per_sample, then interleaved signed 16-bit samples). Speech events
go out as text messages so the client can voice them.

The loop never blocks on a slow client: outgoing audio frames sit in a
bounded queue that drops oldest-first, and every state message carries the
current audio sequence number so the client can detect the gap.

A manual-clock mode (client sends {"type": "step"} to advance one tick)
exists for deterministic conformance tests; the UI never uses it.
"""

from __future__ import annotations

import asyncio
import json
import struct
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from . import audio
from .config import AppConfig
from .mask import write_pgm
from .pipeline import (
    AlertPipeline,
    BeepEvent,
    FrameInput,
    OrientationMode,
    SpeechEvent,
    event_log_lines,
)
from .scene import apply_mask_noise, render_mask, step_agent, true_distance

__all__ = [
    "PROTOCOL_VERSION",
    "ProtocolError",
    "SessionSettings",
    "encode_audio_frame",
    "decode_audio_frame",
    "AlertServer",
    "run_server",
]

PROTOCOL_VERSION = 1
FRAME_HEADER = struct.Struct("<IIHH")
_FRAME_QUEUE_LIMIT = 64


class ProtocolError(ValueError):
    """Client message violates the session protocol."""


@dataclass(frozen=True)
class SessionSettings:
    config: AppConfig = field(default_factory=AppConfig)
    mode: OrientationMode = OrientationMode.SONIFICATION
    tick_hz: float = 20.0
    sample_rate: int = audio.DEFAULT_SAMPLE_RATE
    speed_cm_s: float = 50.0
    manual_clock: bool = False
    event_log: Path | None = None
    dump_masks: Path | None = None
    max_ticks: int | None = None

    def __post_init__(self) -> None:
        if not 5.0 <= self.tick_hz <= 60.0:
            raise ValueError(f"tick_hz must lie in [5, 60], got {self.tick_hz}")


def encode_audio_frame(seq: int, sample_rate: int, channels: int, samples: np.ndarray) -> bytes:
    return FRAME_HEADER.pack(seq, sample_rate, channels, 16) + audio.pcm16_bytes(samples)


def decode_audio_frame(data: bytes) -> tuple[int, int, int, int, np.ndarray]:
    """Split a binary frame into (seq, sample_rate, channels, bits, int16 samples)."""
    if len(data) < FRAME_HEADER.size:
        raise ValueError("frame shorter than its header")
    seq, rate, channels, bits = FRAME_HEADER.unpack_from(data)
    if bits != 16:
        raise ValueError(f"unsupported bits_per_sample {bits}")
    samples = np.frombuffer(data, dtype="<i2", offset=FRAME_HEADER.size)
    return seq, rate, channels, bits, samples


class _Session:
    """World + pipeline state for one connected client."""

    def __init__(self, settings: SessionSettings) -> None:
        self.settings = settings
        self.world = settings.config.world.make_world()
        self.mode = settings.mode
        self.move = 0
        self.turn_deg = 0.0
        self.tick_index = 0
        self.audio_seq = 0
        self.last_pan = 0.0
        self.event_lines: list[str] = []
        self._reset_pipeline()

    def _reset_pipeline(self) -> None:
        cfg = self.settings.config
        self.pipeline = AlertPipeline(
            cfg.camera, cfg.zones, self.mode, sample_rate=self.settings.sample_rate
        )
        self.pstate = self.pipeline.initial_state()
        self.tick_index = 0

    def apply(self, msg: dict) -> None:
        kind = msg.get("type")
        if kind == "input":
            move = msg.get("move", 0)
            turn = msg.get("turn_deg", 0.0)
            if move not in (-1, 0, 1) or not isinstance(turn, (int, float)):
                raise ProtocolError("input needs move in {-1,0,1} and numeric turn_deg")
            self.move, self.turn_deg = int(move), float(turn)
        elif kind == "mode":
            try:
                self.mode = OrientationMode(msg.get("orientation"))
            except ValueError:
                raise ProtocolError("mode.orientation must be 'sonification' or 'speech'")
            self._reset_pipeline()
        elif kind == "reset":
            approach = msg.get("approach_deg")
            if approach not in (0, 30, 60):
                raise ProtocolError("reset.approach_deg must be 0, 30 or 60")
            self.world = self.settings.config.world.make_world(float(approach))
            self.move, self.turn_deg = 0, 0.0
            self._reset_pipeline()
        elif kind == "step":
            pass  # clock advance; handled by the session loop
        else:
            raise ProtocolError(f"unknown message type: {kind!r}")

    def tick(self) -> tuple[dict, bytes, list[str]]:
        """Advance one tick; returns (state message, audio frame, speech texts)."""
        s = self.settings
        dt = 1.0 / s.tick_hz
        if self.move or self.turn_deg:
            agent = step_agent(self.world.agent, self.move * s.speed_cm_s * dt, self.turn_deg)
            self.world = replace(self.world, agent=agent)
        mask = render_mask(self.world, s.config.camera)
        noise = s.config.world.noise_flip_rate
        if noise > 0:
            mask = apply_mask_noise(mask, noise, seed=s.config.world.seed + self.tick_index)
        if s.dump_masks is not None:
            write_pgm(mask, Path(s.dump_masks) / f"{self.tick_index:06d}.pgm")

        frame = FrameInput(timestamp_s=self.tick_index * dt, mask=mask)
        self.pstate, out = self.pipeline.tick(self.pstate, frame, dt)
        self.tick_index += 1

        speech = []
        for ev in out.events:
            if isinstance(ev, BeepEvent):
                self.last_pan = ev.pan
            elif isinstance(ev, SpeechEvent):
                speech.append(ev.text)
        self.event_lines.extend(event_log_lines(out.events))

        self.audio_seq += 1
        frame_bytes = encode_audio_frame(
            self.audio_seq, s.sample_rate, out.pcm.channels, out.pcm.samples
        )
        level = self.pstate.current_level
        state_msg = {
            "type": "state",
            "t": round(frame.timestamp_s, 6),
            "distance_cm": true_distance(self.world),
            "zone": level.zone.value,
            "sublevel": level.sublevel,
            "orientation_deg": self.pstate.last_orientation_deg,
            "pan": self.last_pan,
            "agent": {
                "x": self.world.agent.x_cm,
                "y": self.world.agent.y_cm,
                "heading_deg": self.world.agent.heading_deg,
            },
            "audio_seq": self.audio_seq,
        }
        return state_msg, frame_bytes, speech

    def write_event_log(self) -> None:
        if self.settings.event_log is not None:
            text = "".join(line + "\n" for line in self.event_lines)
            Path(self.settings.event_log).write_text(text)


class AlertServer:
    """Async context manager around the websocket listener."""

    def __init__(self, settings: SessionSettings, host: str = "127.0.0.1", port: int = 0):
        self.settings = settings
        self.host = host
        self.port = port
        self._busy = False
        self._server = None

    async def __aenter__(self) -> "AlertServer":
        self._server = await ws_serve(self._handler, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        return self

    async def __aexit__(self, *exc) -> None:
        self._server.close()
        await self._server.wait_closed()

    async def wait_closed(self) -> None:
        await self._server.wait_closed()

    async def _handler(self, ws) -> None:
        if self._busy:
            await ws.send(json.dumps({"type": "error", "message": "session busy"}))
            await ws.close()
            return
        self._busy = True
        session = _Session(self.settings)
        try:
            await self._expect_hello(ws)
            if self.settings.manual_clock:
                await self._run_manual(ws, session)
            else:
                await self._run_realtime(ws, session)
        except ProtocolError as err:
            try:
                await ws.send(json.dumps({"type": "error", "message": str(err)}))
            except ConnectionClosed:
                pass
            await ws.close()
        except ConnectionClosed:
            pass
        finally:
            session.write_event_log()
            self._busy = False

    async def _expect_hello(self, ws) -> None:
        msg = _parse(await ws.recv())
        if msg.get("type") != "hello" or msg.get("protocol") != PROTOCOL_VERSION:
            raise ProtocolError(f"expected hello with protocol {PROTOCOL_VERSION}")

    async def _run_manual(self, ws, session: _Session) -> None:
        """Lockstep: each {"type":"step"} advances exactly one tick."""
        ticks = 0
        async for raw in ws:
            msg = _parse(raw)
            session.apply(msg)
            if msg.get("type") != "step":
                continue
            state_msg, frame, speech = session.tick()
            await ws.send(json.dumps(state_msg))
            await ws.send(frame)
            for text in speech:
                await ws.send(json.dumps({"type": "speech", "text": text}))
            ticks += 1
            if self.settings.max_ticks is not None and ticks >= self.settings.max_ticks:
                break
        await ws.close()

    async def _run_realtime(self, ws, session: _Session) -> None:
        """Free-running tick loop; reader and sender run as separate tasks."""
        control: asyncio.Queue = asyncio.Queue()
        frames: deque[bytes] = deque(maxlen=_FRAME_QUEUE_LIMIT)
        wake = asyncio.Event()
        closed = asyncio.Event()
        error: list[ProtocolError] = []

        async def reader() -> None:
            try:
                async for raw in ws:
                    try:
                        session.apply(_parse(raw))
                    except ProtocolError as err:
                        error.append(err)
                        closed.set()
                        return
            except ConnectionClosed:
                pass
            closed.set()

        async def sender() -> None:
            while not closed.is_set():
                await wake.wait()
                wake.clear()
                try:
                    while not control.empty():
                        await ws.send(control.get_nowait())
                    while frames:
                        await ws.send(frames.popleft())
                except ConnectionClosed:
                    closed.set()
                    return

        reader_task = asyncio.create_task(reader())
        sender_task = asyncio.create_task(sender())
        dt = 1.0 / self.settings.tick_hz
        loop = asyncio.get_running_loop()
        next_tick = loop.time()
        ticks = 0
        try:
            while not closed.is_set():
                state_msg, frame, speech = session.tick()
                control.put_nowait(json.dumps(state_msg))
                frames.append(frame)
                for text in speech:
                    control.put_nowait(json.dumps({"type": "speech", "text": text}))
                wake.set()
                ticks += 1
                if self.settings.max_ticks is not None and ticks >= self.settings.max_ticks:
                    break
                next_tick += dt
                delay = next_tick - loop.time()
                if delay > 0:
                    try:
                        await asyncio.wait_for(closed.wait(), timeout=delay)
                    except asyncio.TimeoutError:
                        pass
                else:
                    next_tick = loop.time()  # fell behind; do not burst
        finally:
            closed.set()
            wake.set()
            reader_task.cancel()
            sender_task.cancel()
            await asyncio.gather(reader_task, sender_task, return_exceptions=True)
            # flush anything the sender had not gotten to before teardown
            try:
                while not control.empty():
                    await ws.send(control.get_nowait())
                while frames:
                    await ws.send(frames.popleft())
            except ConnectionClosed:
                pass
        if error:
            raise error[0]
        await ws.close()


def _parse(raw) -> dict:
    if isinstance(raw, bytes):
        raise ProtocolError("binary frames are server-to-client only")
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError:
        raise ProtocolError("message is not valid JSON")
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    return msg


async def run_server(settings: SessionSettings, host: str, port: int) -> None:
    """Run until interrupted; used by the CLI."""
    async with AlertServer(settings, host, port) as server:
        print(f"curbalert session service listening on ws://{host}:{server.port}")
        await server.wait_closed()
