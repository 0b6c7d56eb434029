/**
 * Gapless scheduled playback of the server's audio frames.
 *
 * Frames must render in sequence order: stale or duplicate sequence numbers
 * are discarded, and a missing range is replaced by silence of the same
 * duration (the playhead advances without scheduling anything) so later
 * frames stay aligned.
 *
 * The Web Audio dependency is injected as a minimal sink so the scheduling
 * logic runs under plain unit tests.
 */

import { AudioFrame, deinterleave } from "./protocol.js";

export interface PcmSink {
  /** Current playback clock in seconds. */
  now(): number;
  /** Schedule per-channel sample data to start at `when` (same clock). */
  schedule(channels: Float32Array[], sampleRate: number, when: number): void;
}

export interface PlaybackStats {
  played: number;
  droppedOutOfOrder: number;
  gapFrames: number;
}

export class PcmPlayer {
  private nextSeq: number | null = null;
  private playhead = 0;
  readonly stats: PlaybackStats = { played: 0, droppedOutOfOrder: 0, gapFrames: 0 };

  constructor(
    private readonly sink: PcmSink,
    private readonly log: (message: string) => void = () => {},
  ) {}

  push(frame: AudioFrame): void {
    if (this.nextSeq !== null && frame.seq < this.nextSeq) {
      this.stats.droppedOutOfOrder += 1;
      this.log(`discarded out-of-order audio frame ${frame.seq}`);
      return;
    }
    const frameSeconds =
      frame.samples.length / frame.channels / frame.sampleRate;
    if (this.nextSeq !== null && frame.seq > this.nextSeq) {
      const missing = frame.seq - this.nextSeq;
      this.playhead += missing * frameSeconds;
      this.stats.gapFrames += missing;
      this.log(`filled ${missing} dropped frame(s) with silence`);
    }
    const start = Math.max(this.sink.now(), this.playhead);
    if (frame.samples.length > 0) {
      this.sink.schedule(deinterleave(frame), frame.sampleRate, start);
    }
    this.playhead = start + frameSeconds;
    this.nextSeq = frame.seq + 1;
    this.stats.played += 1;
  }

  /** Fraction of pushed-or-skipped frames that actually played, in order. */
  inOrderRate(): number {
    const total = this.stats.played + this.stats.droppedOutOfOrder + this.stats.gapFrames;
    return total === 0 ? 1 : this.stats.played / total;
  }

  reset(): void {
    this.nextSeq = null;
    this.playhead = 0;
  }
}

/** Web Audio implementation of the sink; kept thin and untested. */
export function webAudioSink(ctx: AudioContext): PcmSink {
  return {
    now: () => ctx.currentTime,
    schedule(channels, sampleRate, when) {
      const buffer = ctx.createBuffer(channels.length, channels[0].length, sampleRate);
      channels.forEach((data, i) => buffer.getChannelData(i).set(data));
      const source = ctx.createBufferSource();
      source.buffer = buffer;
      source.connect(ctx.destination);
      source.start(when);
    },
  };
}
