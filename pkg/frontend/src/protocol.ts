// Wire protocol shared with the engine service: one JSON object per
// websocket text frame, discriminated by its `type` field.

export type Mode = "FixedRGB" | "Decoupled" | "DecoupledWithMesh";
export const MODES: Mode[] = ["FixedRGB", "Decoupled", "DecoupledWithMesh"];

export interface PoseData {
  position: [number, number, number];
  orientation_wxyz: [number, number, number, number];
  yaw_deg: number;
  pitch_deg: number;
}

export interface CoverageImage {
  cols: number;
  rows: number;
  labels: string;      // row-major, one of L (live), M (mesh), B (blank)
  colors_hex: string;  // six hex digits per cell, same order as labels
}

export interface CoverageReport {
  live_fraction: number;
  mesh_fraction: number;
  blank_fraction: number;
}

export interface Snapshot {
  type: "snapshot";
  tick: number;
  time_s: number;
  mode: Mode;
  scanning: boolean;
  operator_pose: PoseData;
  robot_pose: PoseData;
  coverage_image: CoverageImage | null;
  coverage_report: CoverageReport | null;
  lag_estimate: number | null;
  calibration_residual: number;
}

export interface Ack {
  type: "ack";
  name: string;
  tick: number;
}

export interface ServerError {
  type: "error";
  message: string;
}

export type ServerMessage = Snapshot | Ack | ServerError;

export type Command =
  | { name: "head_target"; yaw: number; pitch: number }
  | { name: "base_velocity"; v: number; turn?: number }
  | { name: "calibrate" }
  | { name: "set_mode"; mode: Mode }
  | { name: "scan"; action: "start" | "stop" };

export function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function parseServerMessage(text: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    throw new Error("message is not valid JSON");
  }
  if (typeof data !== "object" || data === null || !("type" in data)) {
    throw new Error("message has no type field");
  }
  const msg = data as Record<string, unknown>;
  switch (msg.type) {
    case "snapshot": {
      if (typeof msg.tick !== "number") {
        throw new Error("snapshot without numeric tick");
      }
      const image = msg.coverage_image as CoverageImage | null;
      if (image) {
        const cells = image.cols * image.rows;
        if (image.labels.length !== cells || image.colors_hex.length !== cells * 6) {
          throw new Error("coverage grid size mismatch");
        }
      }
      return msg as unknown as Snapshot;
    }
    case "ack":
      return msg as unknown as Ack;
    case "error":
      return msg as unknown as ServerError;
    default:
      throw new Error(`unknown message type ${String(msg.type)}`);
  }
}

// Values are range-clamped here so the engine never sees wild input,
// whatever the pointer math produced.
export function encodeCommand(cmd: Command): string {
  let body: Record<string, unknown>;
  switch (cmd.name) {
    case "head_target":
      body = {
        name: cmd.name,
        yaw: clamp(cmd.yaw, -180, 180),
        pitch: clamp(cmd.pitch, -90, 90),
      };
      break;
    case "base_velocity":
      body = {
        name: cmd.name,
        v: clamp(cmd.v, -2, 2),
        turn: clamp(cmd.turn ?? 0, -180, 180),
      };
      break;
    case "set_mode":
      if (!MODES.includes(cmd.mode)) {
        throw new Error(`unknown mode ${cmd.mode}`);
      }
      body = { name: cmd.name, mode: cmd.mode };
      break;
    case "scan":
      body = { name: cmd.name, action: cmd.action };
      break;
    case "calibrate":
      body = { name: cmd.name };
      break;
  }
  return JSON.stringify({ type: "command", ...body });
}
