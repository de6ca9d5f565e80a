// Pointer and keyboard input mapping, pure parts kept testable.

import { clamp } from "./protocol.js";

/** Maps a pointer drag into clamped head yaw/pitch targets. */
export class DragMapper {
  private startX = 0;
  private startY = 0;
  private startYaw = 0;
  private startPitch = 0;
  active = false;

  constructor(private degPerPx = 0.3) {}

  start(x: number, y: number, yaw: number, pitch: number): void {
    this.active = true;
    this.startX = x;
    this.startY = y;
    this.startYaw = yaw;
    this.startPitch = pitch;
  }

  move(x: number, y: number): { yaw: number; pitch: number } | null {
    if (!this.active) {
      return null;
    }
    // dragging right turns right (negative yaw: +z is up, headings grow
    // counter-clockwise); dragging down pitches down (positive pitch)
    return {
      yaw: clamp(this.startYaw - (x - this.startX) * this.degPerPx, -180, 180),
      pitch: clamp(this.startPitch + (y - this.startY) * this.degPerPx, -90, 90),
    };
  }

  end(): void {
    this.active = false;
  }
}

/** Base velocity from the currently held keys (w/s forward, a/d turn). */
export function velocityForKeys(keys: Set<string>): { v: number; turn: number } {
  let v = 0;
  let turn = 0;
  if (keys.has("w")) v += 0.5;
  if (keys.has("s")) v -= 0.5;
  if (keys.has("a")) turn += 30;
  if (keys.has("d")) turn -= 30;
  return { v, turn };
}
