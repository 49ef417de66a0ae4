// Flicker math mirrored from the server. The schedule-parity test holds the
// two implementations to within 1e-6 of each other.

export type FlickerTag = { f: number; phi: number };

export type LayoutKey = {
  key: string;
  k: number;
  row: number;
  col: number;
  f: number;
  phi: number;
};

export type Layout = {
  refresh_rate: number;
  sampling_rate: number;
  keys: LayoutKey[];
};

/** Grayscale of frame i: 0.5 * (1 + sin(2*pi*f*(i/refreshRate) + phi)). */
export function luminance(tag: FlickerTag, frameIndex: number, refreshRate: number): number {
  if (frameIndex < 0) throw new Error(`frame index must be >= 0, got ${frameIndex}`);
  if (refreshRate <= 2 * tag.f) {
    throw new Error(`refresh rate ${refreshRate} Hz aliases a ${tag.f} Hz flicker`);
  }
  return 0.5 * (1 + Math.sin(2 * Math.PI * tag.f * (frameIndex / refreshRate) + tag.phi));
}

/** Per-frame values for frames 0..nFrames-1 (the freeze-frame dump). */
export function schedule(tag: FlickerTag, nFrames: number, refreshRate: number): number[] {
  const out = new Array<number>(nFrames);
  for (let i = 0; i < nFrames; i++) out[i] = luminance(tag, i, refreshRate);
  return out;
}

/** Largest |a-b| across two schedules; the parity check reports this. */
export function maxScheduleDelta(a: number[], b: number[]): number {
  if (a.length !== b.length) return Infinity;
  let worst = 0;
  for (let i = 0; i < a.length; i++) worst = Math.max(worst, Math.abs(a[i] - b[i]));
  return worst;
}

/**
 * Measures the real frame rate from rAF timestamps and compares it to the
 * configured refresh rate; a large mismatch means the rendered flicker does
 * not carry the advertised frequencies.
 */
export class RefreshMismatchDetector {
  private timestamps: number[] = [];

  constructor(
    readonly configuredHz: number,
    readonly windowFrames = 90,
    readonly toleranceHz = 3,
  ) {}

  /** Feed one rAF timestamp (ms); returns measured Hz once warmed up. */
  sample(timestampMs: number): number | null {
    this.timestamps.push(timestampMs);
    if (this.timestamps.length > this.windowFrames) this.timestamps.shift();
    if (this.timestamps.length < 10) return null;
    const span = this.timestamps[this.timestamps.length - 1] - this.timestamps[0];
    if (span <= 0) return null;
    return ((this.timestamps.length - 1) * 1000) / span;
  }

  mismatched(measuredHz: number | null): boolean {
    return measuredHz !== null && Math.abs(measuredHz - this.configuredHz) > this.toleranceHz;
  }
}
