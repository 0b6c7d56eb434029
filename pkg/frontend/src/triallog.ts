/**
 * Human-in-the-loop trial log. On each stop keypress the current oracle
 * distance and residual heading error are recorded from the latest state
 * message; the export uses the exact CSV schema of the simulated-experiment
 * harness so both feed the same external statistics.
 */

import { StateMessage } from "./protocol.js";

export const CSV_HEADER =
  "condition,approach_deg,repetition,seed,safety_window_cm,orientation_error_deg";

export interface TrialRecord {
  condition: string;
  approachDeg: number;
  repetition: number;
  seed: number;
  safetyWindowCm: number;
  orientationErrorDeg: number;
}

/** Wrap to (-90, 90]: headings relative to a line are defined modulo 180. */
export function wrapAngleDeg(angle: number): number {
  let wrapped = ((angle + 90) % 180 + 180) % 180 - 90;
  if (wrapped === -90) wrapped = 90;
  return wrapped;
}

export class TrialLogger {
  private rows: TrialRecord[] = [];

  record(state: StateMessage, condition: string, approachDeg: number): TrialRecord {
    const row: TrialRecord = {
      condition,
      approachDeg,
      repetition: this.rows.length + 1,
      seed: 0, // interactive trials carry no RNG seed
      safetyWindowCm: state.distance_cm,
      orientationErrorDeg: Math.abs(wrapAngleDeg(state.agent.heading_deg)),
    };
    this.rows.push(row);
    return row;
  }

  count(): number {
    return this.rows.length;
  }

  toCsv(): string {
    const lines = [CSV_HEADER];
    for (const r of this.rows) {
      lines.push(
        [
          r.condition,
          String(r.approachDeg),
          String(r.repetition),
          String(r.seed),
          r.safetyWindowCm.toFixed(6),
          r.orientationErrorDeg.toFixed(6),
        ].join(","),
      );
    }
    return lines.map((l) => l + "\n").join("");
  }
}
