// Label-grid rendering: live cells in true color, reconstructed cells in
// their tinted color, blank cells in neutral gray. The pixel buffer is
// produced headlessly so tests can count pixels without a DOM.

import { CoverageImage } from "./protocol.js";

export const BLANK_RGB: [number, number, number] = [128, 128, 128];

export interface LabelCounts {
  live: number;
  mesh: number;
  blank: number;
}

export function countLabels(labels: string): LabelCounts {
  const counts = { live: 0, mesh: 0, blank: 0 };
  for (const ch of labels) {
    if (ch === "L") counts.live += 1;
    else if (ch === "M") counts.mesh += 1;
    else counts.blank += 1;
  }
  return counts;
}

export function cellColor(image: CoverageImage, index: number): [number, number, number] {
  if (image.labels[index] === "B") {
    return BLANK_RGB;
  }
  const at = index * 6;
  return [
    parseInt(image.colors_hex.slice(at, at + 2), 16),
    parseInt(image.colors_hex.slice(at + 2, at + 4), 16),
    parseInt(image.colors_hex.slice(at + 4, at + 6), 16),
  ];
}

export interface RenderedBuffer {
  width: number;
  height: number;
  pixels: Uint8ClampedArray; // RGBA
}

export function renderToBuffer(image: CoverageImage, cellPx = 8): RenderedBuffer {
  const width = image.cols * cellPx;
  const height = image.rows * cellPx;
  const pixels = new Uint8ClampedArray(width * height * 4);
  for (let row = 0; row < image.rows; row++) {
    for (let col = 0; col < image.cols; col++) {
      const [r, g, b] = cellColor(image, row * image.cols + col);
      for (let py = 0; py < cellPx; py++) {
        const base = ((row * cellPx + py) * width + col * cellPx) * 4;
        for (let px = 0; px < cellPx; px++) {
          const at = base + px * 4;
          pixels[at] = r;
          pixels[at + 1] = g;
          pixels[at + 2] = b;
          pixels[at + 3] = 255;
        }
      }
    }
  }
  return { width, height, pixels };
}

export class CoverageCanvas {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement, private cellPx = 8) {
    const ctx = canvas.getContext("2d");
    if (!ctx) {
      throw new Error("2d canvas context unavailable");
    }
    this.ctx = ctx;
  }

  draw(image: CoverageImage): void {
    const buffer = renderToBuffer(image, this.cellPx);
    if (this.canvas.width !== buffer.width || this.canvas.height !== buffer.height) {
      this.canvas.width = buffer.width;
      this.canvas.height = buffer.height;
    }
    // copy into a plain-ArrayBuffer-backed view; ImageData refuses the
    // ArrayBufferLike-typed one
    const pixels = new Uint8ClampedArray(buffer.pixels);
    const data = new ImageData(pixels, buffer.width, buffer.height);
    this.ctx.putImageData(data, 0, 0);
  }
}
