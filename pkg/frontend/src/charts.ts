// Canvas chart renderers for the live pane. The mapping helpers are
// pure so they can be unit-tested without a DOM.

export interface Extent {
  min: number;
  max: number;
}

export function extentOf(values: number[], padFraction = 0.05): Extent {
  if (values.length === 0) return { min: 0, max: 1 };
  let min = values[0];
  let max = values[0];
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min === max) {
    // Flat traces still need a visible band around the value.
    const pad = Math.max(1, Math.abs(min) * 0.1);
    return { min: min - pad, max: max + pad };
  }
  const pad = (max - min) * padFraction;
  return { min: min - pad, max: max + pad };
}

export function mapRange(v: number, ext: Extent, outLo: number, outHi: number): number {
  const t = (v - ext.min) / (ext.max - ext.min);
  return outLo + t * (outHi - outLo);
}

export function polylinePoints(
  xs: number[],
  ys: number[],
  width: number,
  height: number,
  xExt: Extent,
  yExt: Extent,
): Array<[number, number]> {
  const pts: Array<[number, number]> = [];
  for (let k = 0; k < xs.length; k++) {
    // Canvas y grows downward.
    pts.push([
      mapRange(xs[k], xExt, 0, width),
      mapRange(ys[k], yExt, height, 0),
    ]);
  }
  return pts;
}

const AXIS_COLOR = "#44506a";
const GRID_COLOR = "#222a3d";
const LABEL_COLOR = "#8ea0c0";
const PAD = { left: 54, right: 12, top: 10, bottom: 24 };

export class TraceChart {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement) {
    this.ctx = canvas.getContext("2d")!;
  }

  clear(message?: string): void {
    const { width, height } = this.canvas;
    this.ctx.clearRect(0, 0, width, height);
    if (message) {
      this.ctx.fillStyle = LABEL_COLOR;
      this.ctx.font = "14px system-ui, sans-serif";
      this.ctx.textAlign = "center";
      this.ctx.fillText(message, width / 2, height / 2);
    }
  }

  private frame(xExt: Extent, yExt: Extent, plotW: number, plotH: number): void {
    const ctx = this.ctx;
    ctx.strokeStyle = AXIS_COLOR;
    ctx.lineWidth = 1;
    ctx.strokeRect(PAD.left, PAD.top, plotW, plotH);
    ctx.fillStyle = LABEL_COLOR;
    ctx.font = "11px system-ui, sans-serif";
    ctx.textAlign = "right";
    for (const t of [0, 0.5, 1]) {
      const v = yExt.min + (yExt.max - yExt.min) * t;
      const y = PAD.top + plotH - t * plotH;
      ctx.fillText(v.toPrecision(4), PAD.left - 6, y + 4);
      if (t === 0.5) {
        ctx.strokeStyle = GRID_COLOR;
        ctx.beginPath();
        ctx.moveTo(PAD.left, y);
        ctx.lineTo(PAD.left + plotW, y);
        ctx.stroke();
      }
    }
    ctx.textAlign = "center";
    for (const t of [0, 0.5, 1]) {
      const v = xExt.min + (xExt.max - xExt.min) * t;
      ctx.fillText(String(Math.round(v)), PAD.left + t * plotW, PAD.top + plotH + 16);
    }
  }

  drawLine(xs: number[], ys: number[], color: string, yExt?: Extent): void {
    const { width, height } = this.canvas;
    const plotW = width - PAD.left - PAD.right;
    const plotH = height - PAD.top - PAD.bottom;
    this.clear();
    const xExt = extentOf(xs, 0);
    const ext = yExt ?? extentOf(ys);
    this.frame(xExt, ext, plotW, plotH);
    const pts = polylinePoints(xs, ys, plotW, plotH, xExt, ext);
    const ctx = this.ctx;
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    pts.forEach(([x, y], k) => {
      if (k === 0) ctx.moveTo(PAD.left + x, PAD.top + y);
      else ctx.lineTo(PAD.left + x, PAD.top + y);
    });
    ctx.stroke();
  }

  drawScatter(is: number[], qs: number[], color: string): void {
    const { width, height } = this.canvas;
    const plotW = width - PAD.left - PAD.right;
    const plotH = height - PAD.top - PAD.bottom;
    this.clear();
    // Square, zero-centered extent so constellations keep their shape.
    const m = Math.max(
      1,
      ...is.map((v) => Math.abs(v)),
      ...qs.map((v) => Math.abs(v)),
    );
    const ext = { min: -m * 1.1, max: m * 1.1 };
    this.frame(ext, ext, plotW, plotH);
    const ctx = this.ctx;
    ctx.fillStyle = color;
    for (let k = 0; k < is.length; k++) {
      const x = PAD.left + mapRange(is[k], ext, 0, plotW);
      const y = PAD.top + mapRange(qs[k], ext, plotH, 0);
      ctx.beginPath();
      ctx.arc(x, y, 2, 0, Math.PI * 2);
      ctx.fill();
    }
  }
}
