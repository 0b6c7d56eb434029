/**
 * Keyboard mapping: hold ArrowUp/ArrowDown to walk, hold ArrowLeft/ArrowRight
 * to turn 5 degrees per tick, Space opens the reset dialog, S logs a stop,
 * B toggles blind mode.
 */

export const TURN_STEP_DEG = 5;

export type KeyAction = "input" | "reset" | "stop" | "blind" | null;

export interface InputState {
  move: -1 | 0 | 1;
  turnDeg: number;
}

export class KeyboardController {
  private held = new Set<string>();

  keyDown(key: string): KeyAction {
    switch (key) {
      case " ":
        return "reset";
      case "s":
      case "S":
        return "stop";
      case "b":
      case "B":
        return "blind";
      case "ArrowUp":
      case "ArrowDown":
      case "ArrowLeft":
      case "ArrowRight":
        this.held.add(key);
        return "input";
      default:
        return null;
    }
  }

  keyUp(key: string): KeyAction {
    if (this.held.delete(key)) return "input";
    return null;
  }

  releaseAll(): void {
    this.held.clear();
  }

  current(): InputState {
    let move: -1 | 0 | 1 = 0;
    if (this.held.has("ArrowUp") && !this.held.has("ArrowDown")) move = 1;
    if (this.held.has("ArrowDown") && !this.held.has("ArrowUp")) move = -1;
    let turn = 0;
    // positive heading turns clockwise (to the agent's right)
    if (this.held.has("ArrowRight")) turn += TURN_STEP_DEG;
    if (this.held.has("ArrowLeft")) turn -= TURN_STEP_DEG;
    return { move, turnDeg: turn };
  }
}
