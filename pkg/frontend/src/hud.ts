// Readouts: lag, calibration residual, mode, scan state, staleness.

import { Snapshot } from "./protocol.js";

export function formatLag(lag: number | null): string {
  if (lag === null || lag === undefined || Number.isNaN(lag)) {
    return "lag: --";
  }
  return `lag: ${Math.round(lag * 1000)} ms`;
}

export function formatResidual(residual: number): string {
  if (residual < 1e-9) {
    return "residual: 0";
  }
  return `residual: ${residual.toExponential(2)}`;
}

/** Flags a stalled stream: no new tick within `factor` snapshot periods. */
export class StaleDetector {
  private lastTick = -1;
  private lastChangeMs = 0;

  constructor(private periodMs: number, private factor = 2) {}

  observe(tick: number, nowMs: number): void {
    if (tick !== this.lastTick) {
      this.lastTick = tick;
      this.lastChangeMs = nowMs;
    }
  }

  isStale(nowMs: number): boolean {
    return this.lastTick >= 0 && nowMs - this.lastChangeMs > this.periodMs * this.factor;
  }
}

export class Hud {
  private lagEl: HTMLElement;
  private residualEl: HTMLElement;
  private modeEl: HTMLElement;
  private poseEl: HTMLElement;
  private staleEl: HTMLElement;
  private statusEl: HTMLElement;

  constructor(root: HTMLElement) {
    const make = (cls: string) => {
      const el = document.createElement("span");
      el.className = `hud-item ${cls}`;
      root.appendChild(el);
      return el;
    };
    this.statusEl = make("status");
    this.modeEl = make("mode");
    this.poseEl = make("pose");
    this.lagEl = make("lag");
    this.residualEl = make("residual");
    this.staleEl = make("stale");
  }

  update(snapshot: Snapshot): void {
    this.modeEl.textContent = `${snapshot.mode}${snapshot.scanning ? " [scanning]" : ""}`;
    this.poseEl.textContent =
      `head ${snapshot.operator_pose.yaw_deg.toFixed(1)}° / ` +
      `cam ${snapshot.robot_pose.yaw_deg.toFixed(1)}°`;
    this.lagEl.textContent = formatLag(snapshot.lag_estimate);
    this.residualEl.textContent = formatResidual(snapshot.calibration_residual);
  }

  setStatus(text: string): void {
    this.statusEl.textContent = text;
  }

  setStale(stale: boolean): void {
    this.staleEl.textContent = stale ? "STALE" : "";
    this.staleEl.classList.toggle("active", stale);
  }
}
