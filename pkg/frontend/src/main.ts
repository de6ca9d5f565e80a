// Entry point: connect to the engine service, render the three-region
// coverage view, and forward operator input as commands.

import { Connection } from "./connection.js";
import { Hud, StaleDetector } from "./hud.js";
import { DragMapper, velocityForKeys } from "./input.js";
import { Mode, MODES, Snapshot } from "./protocol.js";
import { CoverageCanvas } from "./renderer.js";

const SNAPSHOT_PERIOD_MS = 50;
const COMMAND_THROTTLE_MS = 50;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function main(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const hud = new Hud(el("hud"));
  const renderer = new CoverageCanvas(canvas, 10);
  const stale = new StaleDetector(SNAPSHOT_PERIOD_MS);

  let lastSnapshot: Snapshot | null = null;
  let lastSent = 0;

  const proto = location.protocol === "https:" ? "wss" : "ws";
  const connection = new Connection(`${proto}://${location.host}/ws`, {
    reconnectDelayMs: SNAPSHOT_PERIOD_MS,
    onStatus: (status) => hud.setStatus(status),
    onMessage: (message) => {
      if (message.type === "error") {
        console.warn("engine:", message.message);
        return;
      }
      if (message.type !== "snapshot") {
        return;
      }
      lastSnapshot = message;
      stale.observe(message.tick, performance.now());
      if (message.coverage_image) {
        renderer.draw(message.coverage_image);
      }
      hud.update(message);
      const modeSelect = el<HTMLSelectElement>("mode");
      if (modeSelect.value !== message.mode && document.activeElement !== modeSelect) {
        modeSelect.value = message.mode;
      }
    },
  });
  connection.connect();

  setInterval(() => hud.setStale(stale.isStale(performance.now())), SNAPSHOT_PERIOD_MS);

  // pointer drag steers the head
  const drag = new DragMapper();
  canvas.addEventListener("pointerdown", (ev) => {
    const yaw = lastSnapshot?.operator_pose.yaw_deg ?? 0;
    const pitch = lastSnapshot?.operator_pose.pitch_deg ?? 0;
    drag.start(ev.clientX, ev.clientY, yaw, pitch);
    canvas.setPointerCapture(ev.pointerId);
  });
  canvas.addEventListener("pointermove", (ev) => {
    const target = drag.move(ev.clientX, ev.clientY);
    if (!target) return;
    const now = performance.now();
    if (now - lastSent >= COMMAND_THROTTLE_MS) {
      lastSent = now;
      connection.send({ name: "head_target", yaw: target.yaw, pitch: target.pitch });
    }
  });
  const endDrag = () => drag.end();
  canvas.addEventListener("pointerup", endDrag);
  canvas.addEventListener("pointercancel", endDrag);

  // held keys drive the base
  const held = new Set<string>();
  let lastVel = { v: 0, turn: 0 };
  const pushVelocity = () => {
    const vel = velocityForKeys(held);
    if (vel.v !== lastVel.v || vel.turn !== lastVel.turn) {
      lastVel = vel;
      connection.send({ name: "base_velocity", v: vel.v, turn: vel.turn });
    }
  };
  window.addEventListener("keydown", (ev) => {
    held.add(ev.key.toLowerCase());
    pushVelocity();
  });
  window.addEventListener("keyup", (ev) => {
    held.delete(ev.key.toLowerCase());
    pushVelocity();
  });

  el<HTMLButtonElement>("calibrate").addEventListener("click", () => {
    connection.send({ name: "calibrate" });
  });

  const scanButton = el<HTMLButtonElement>("scan");
  scanButton.addEventListener("click", () => {
    const starting = scanButton.dataset.state !== "on";
    scanButton.dataset.state = starting ? "on" : "off";
    scanButton.textContent = starting ? "Stop scan" : "Start scan";
    connection.send({ name: "scan", action: starting ? "start" : "stop" });
  });

  const modeSelect = el<HTMLSelectElement>("mode");
  for (const mode of MODES) {
    const option = document.createElement("option");
    option.value = mode;
    option.textContent = mode;
    modeSelect.appendChild(option);
  }
  modeSelect.addEventListener("change", () => {
    connection.send({ name: "set_mode", mode: modeSelect.value as Mode });
  });
}

window.addEventListener("load", main);
