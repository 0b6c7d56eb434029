/**
 * Wire protocol shared with the session service: JSON control messages in
 * both directions, binary audio frames server-to-client.
 *
 * Audio frame layout (little-endian): u32 seq, u32 sample_rate, u16 channels,
 * u16 bits_per_sample (always 16), then interleaved signed 16-bit samples.
 */

export type ZoneName = "none" | "far" | "medium" | "near";

export interface StateMessage {
  type: "state";
  t: number;
  distance_cm: number;
  zone: ZoneName;
  sublevel: number | null;
  orientation_deg: number | null;
  pan: number;
  agent: { x: number; y: number; heading_deg: number };
  audio_seq: number;
}

export interface SpeechMessage {
  type: "speech";
  text: string;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = StateMessage | SpeechMessage | ErrorMessage;

export type ClientMessage =
  | { type: "hello"; protocol: 1 }
  | { type: "input"; move: -1 | 0 | 1; turn_deg: number }
  | { type: "mode"; orientation: "sonification" | "speech" }
  | { type: "reset"; approach_deg: 0 | 30 | 60 };

export const HELLO: ClientMessage = { type: "hello", protocol: 1 };

const ZONES: ReadonlySet<string> = new Set(["none", "far", "medium", "near"]);

export function parseServerMessage(raw: string): ServerMessage {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    throw new Error("server message is not valid JSON");
  }
  const obj = msg as Record<string, unknown>;
  if (obj === null || typeof obj !== "object" || typeof obj.type !== "string") {
    throw new Error("server message has no type");
  }
  switch (obj.type) {
    case "state": {
      if (typeof obj.distance_cm !== "number" || !ZONES.has(obj.zone as string)) {
        throw new Error("malformed state message");
      }
      return obj as unknown as StateMessage;
    }
    case "speech": {
      if (typeof obj.text !== "string") throw new Error("malformed speech message");
      return obj as unknown as SpeechMessage;
    }
    case "error": {
      if (typeof obj.message !== "string") throw new Error("malformed error message");
      return obj as unknown as ErrorMessage;
    }
    default:
      throw new Error(`unknown server message type: ${obj.type}`);
  }
}

export interface AudioFrame {
  seq: number;
  sampleRate: number;
  channels: number;
  bitsPerSample: number;
  /** Interleaved signed 16-bit samples. */
  samples: Int16Array;
}

export const FRAME_HEADER_BYTES = 12;

export function decodeAudioFrame(buf: ArrayBuffer): AudioFrame {
  if (buf.byteLength < FRAME_HEADER_BYTES) {
    throw new Error("audio frame shorter than its header");
  }
  const view = new DataView(buf);
  const seq = view.getUint32(0, true);
  const sampleRate = view.getUint32(4, true);
  const channels = view.getUint16(8, true);
  const bitsPerSample = view.getUint16(10, true);
  if (bitsPerSample !== 16) {
    throw new Error(`unsupported bits_per_sample: ${bitsPerSample}`);
  }
  if (channels !== 1 && channels !== 2) {
    throw new Error(`unsupported channel count: ${channels}`);
  }
  const body = buf.slice(FRAME_HEADER_BYTES);
  if (body.byteLength % (2 * channels) !== 0) {
    throw new Error("audio frame payload is not a whole number of sample frames");
  }
  return { seq, sampleRate, channels, bitsPerSample, samples: new Int16Array(body) };
}

/** Split an interleaved int16 frame into per-channel float arrays in [-1, 1]. */
export function deinterleave(frame: AudioFrame): Float32Array[] {
  const perChannel = frame.samples.length / frame.channels;
  const out: Float32Array[] = [];
  for (let ch = 0; ch < frame.channels; ch++) {
    const data = new Float32Array(perChannel);
    for (let i = 0; i < perChannel; i++) {
      data[i] = frame.samples[i * frame.channels + ch] / 32768;
    }
    out.push(data);
  }
  return out;
}
