/**
 * Client session logic, kept free of DOM and WebSocket objects so it runs
 * under plain unit tests. Every displayed number comes from server state
 * messages; the client never simulates the world itself. Blind mode is a
 * pure presentation toggle: it changes the view model, never the outbound
 * messages or the audio.
 */

import { InputState } from "./input.js";
import { PcmPlayer } from "./playback.js";
import {
  AudioFrame,
  ClientMessage,
  StateMessage,
  decodeAudioFrame,
  parseServerMessage,
} from "./protocol.js";
import { TrialLogger, TrialRecord } from "./triallog.js";

export interface SessionDelegates {
  send(message: ClientMessage): void;
  player: Pick<PcmPlayer, "push">;
  voice(text: string): void;
  onState(state: StateMessage): void;
  onError(message: string): void;
  log(message: string): void;
}

export interface ViewModel {
  connected: boolean;
  blind: boolean;
  state: StateMessage | null;
  /** null while blind: the scene and numeric readouts are hidden */
  scene: { distanceCm: number; headingDeg: number; x: number; y: number } | null;
  zone: StateMessage["zone"] | null;
  orientationDeg: number | null;
  trialCount: number;
}

export const ZONE_COLORS: Record<string, string> = {
  near: "#d9413d",
  medium: "#e3b73a",
  far: "#4caf50",
  none: "#9e9e9e",
};

export class UiSession {
  latest: StateMessage | null = null;
  blind = false;
  connected = false;
  condition = "beeps_sonification";
  approachDeg = 0;
  readonly trials = new TrialLogger();

  private lastInput: InputState = { move: 0, turnDeg: 0 };

  constructor(private readonly delegates: SessionDelegates) {}

  handleOpen(): void {
    this.connected = true;
    this.delegates.send({ type: "hello", protocol: 1 });
  }

  handleClose(): void {
    this.connected = false;
  }

  handleRaw(data: string | ArrayBuffer): void {
    if (typeof data !== "string") {
      let frame: AudioFrame;
      try {
        frame = decodeAudioFrame(data);
      } catch (err) {
        this.delegates.log(`bad audio frame: ${String(err)}`);
        return;
      }
      this.delegates.player.push(frame);
      return;
    }
    let msg;
    try {
      msg = parseServerMessage(data);
    } catch (err) {
      this.delegates.onError(`malformed server message: ${String(err)}`);
      return;
    }
    if (msg.type === "state") {
      this.latest = msg;
      this.delegates.onState(msg);
    } else if (msg.type === "speech") {
      this.delegates.voice(msg.text);
    } else {
      this.delegates.onError(msg.message);
    }
  }

  /** Forward the held-key state; only sends when it changed. */
  applyInput(input: InputState): void {
    if (input.move === this.lastInput.move && input.turnDeg === this.lastInput.turnDeg) {
      return;
    }
    this.lastInput = input;
    this.delegates.send({ type: "input", move: input.move, turn_deg: input.turnDeg });
  }

  requestReset(approachDeg: 0 | 30 | 60): void {
    this.approachDeg = approachDeg;
    this.delegates.send({ type: "reset", approach_deg: approachDeg });
  }

  setMode(orientation: "sonification" | "speech"): void {
    this.condition = orientation === "speech" ? "beeps_speech" : "beeps_sonification";
    this.delegates.send({ type: "mode", orientation });
  }

  toggleBlind(): boolean {
    this.blind = !this.blind;
    return this.blind;
  }

  /** Record a stop against the latest state; null when nothing arrived yet. */
  recordStop(): TrialRecord | null {
    if (this.latest === null) return null;
    return this.trials.record(this.latest, this.condition, this.approachDeg);
  }

  viewModel(): ViewModel {
    const state = this.latest;
    return {
      connected: this.connected,
      blind: this.blind,
      state,
      scene:
        state === null || this.blind
          ? null
          : {
              distanceCm: state.distance_cm,
              headingDeg: state.agent.heading_deg,
              x: state.agent.x,
              y: state.agent.y,
            },
      zone: state === null || this.blind ? null : state.zone,
      orientationDeg: state === null || this.blind ? null : state.orientation_deg,
      trialCount: this.trials.count(),
    };
  }
}
