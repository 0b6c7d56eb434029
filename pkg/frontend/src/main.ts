/**
 * Browser bootstrap: wires the WebSocket, Web Audio, speech synthesis,
 * keyboard and canvas to the session logic. Everything interesting lives in
 * the imported modules; this file is plain glue.
 */

import { KeyboardController } from "./input.js";
import { PcmPlayer, webAudioSink } from "./playback.js";
import { UiSession } from "./session.js";
import { drawScene } from "./view.js";

const params = new URLSearchParams(location.search);
const url = params.get("server") ?? "ws://127.0.0.1:8765";

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusEl = document.getElementById("status")!;
const dialog = document.getElementById("reset-dialog") as HTMLDialogElement;
const downloadBtn = document.getElementById("download") as HTMLButtonElement;
const modeSelect = document.getElementById("mode") as HTMLSelectElement;

const audioCtx = new AudioContext();
const player = new PcmPlayer(webAudioSink(audioCtx), (m) => console.info(m));
const keyboard = new KeyboardController();

let socket: WebSocket | null = null;

const session = new UiSession({
  send: (msg) => socket?.readyState === WebSocket.OPEN && socket.send(JSON.stringify(msg)),
  player,
  voice: (text) => {
    speechSynthesis.speak(new SpeechSynthesisUtterance(text));
  },
  onState: () => drawScene(ctx, session.viewModel()),
  onError: (message) => {
    statusEl.textContent = `server error: ${message}`;
  },
  log: (message) => console.info(message),
});

function connect(): void {
  statusEl.textContent = `connecting to ${url}…`;
  socket = new WebSocket(url);
  socket.binaryType = "arraybuffer";
  socket.onopen = () => {
    statusEl.textContent = `connected to ${url}`;
    session.handleOpen();
    drawScene(ctx, session.viewModel());
  };
  socket.onmessage = (event) => session.handleRaw(event.data);
  socket.onclose = () => {
    session.handleClose();
    statusEl.textContent = "disconnected — retrying in 2 s";
    drawScene(ctx, session.viewModel());
    setTimeout(connect, 2000);
  };
  socket.onerror = () => socket?.close();
}

window.addEventListener("keydown", (e) => {
  if (e.repeat) return;
  if (audioCtx.state === "suspended") void audioCtx.resume();
  const action = keyboard.keyDown(e.key);
  if (action === "input") {
    session.applyInput(keyboard.current());
    e.preventDefault();
  } else if (action === "reset") {
    keyboard.releaseAll();
    session.applyInput(keyboard.current());
    dialog.showModal();
    e.preventDefault();
  } else if (action === "stop") {
    const row = session.recordStop();
    statusEl.textContent = row
      ? `logged stop #${row.repetition}: window ${row.safetyWindowCm.toFixed(1)} cm, ` +
        `error ${row.orientationErrorDeg.toFixed(1)}°`
      : "no state yet — cannot log a stop";
  } else if (action === "blind") {
    session.toggleBlind();
    drawScene(ctx, session.viewModel());
  }
});

window.addEventListener("keyup", (e) => {
  if (keyboard.keyUp(e.key) === "input") session.applyInput(keyboard.current());
});

dialog.addEventListener("close", () => {
  const angle = Number(dialog.returnValue);
  if (angle === 0 || angle === 30 || angle === 60) {
    session.requestReset(angle);
  }
});

modeSelect.addEventListener("change", () => {
  session.setMode(modeSelect.value as "sonification" | "speech");
});

downloadBtn.addEventListener("click", () => {
  const blob = new Blob([session.trials.toCsv()], { type: "text/csv" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "trials.csv";
  a.click();
  URL.revokeObjectURL(a.href);
});

connect();
drawScene(ctx, session.viewModel());
