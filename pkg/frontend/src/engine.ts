/** Streaming detection engine: a TypeScript port of the backend session.
 *
 * Per frame: push the shoulder distance into a 50-frame ring (trailing mode),
 * rescale coordinates by the reciprocal trailing mean, select the model's
 * landmark subset, compute per-point speeds against the previous frame
 * (missing points contribute zero), and advance the LSTM once.
 */

import { LstmModel, lstmStep, signingProbability } from "./model.js";
import {
  FACE_END, FACE_START, LEFT_HAND_END, LEFT_HAND_START, LEFT_SHOULDER,
  POINT_COUNT, RIGHT_HAND_END, RIGHT_HAND_START, RIGHT_SHOULDER,
  Frame, NormMode, SUBSET_DIMS, Subset,
} from "./skeleton.js";

export const TRAILING_WINDOW_FRAMES = 50;

export interface EngineConfig {
  model: LstmModel;
  fps: number;
  normMode?: NormMode;  // defaults to the mode recorded in the model file
  window?: number;
}

export interface StepResult {
  probability: number;
  signing: 0 | 1;
  logits: [number, number];
}

function shoulderDistance(frame: Frame): number | null {
  const lc = frame[3 * LEFT_SHOULDER + 2];
  const rc = frame[3 * RIGHT_SHOULDER + 2];
  if (lc <= 0 || rc <= 0) {
    return null;
  }
  const dx = frame[3 * LEFT_SHOULDER] - frame[3 * RIGHT_SHOULDER];
  const dy = frame[3 * LEFT_SHOULDER + 1] - frame[3 * RIGHT_SHOULDER + 1];
  return Math.sqrt(dx * dx + dy * dy);
}

function copySlots(frame: Frame, start: number, end: number, out: Float64Array, outPoint: number) {
  for (let p = start; p < end; p++, outPoint++) {
    out[3 * outPoint] = frame[3 * p];
    out[3 * outPoint + 1] = frame[3 * p + 1];
    out[3 * outPoint + 2] = frame[3 * p + 2];
  }
}

function writeBboxCorners(frame: Frame, start: number, end: number,
                          out: Float64Array, outPoint: number) {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  let present = false;
  for (let p = start; p < end; p++) {
    if (frame[3 * p + 2] <= 0) {
      continue;
    }
    present = true;
    const x = frame[3 * p];
    const y = frame[3 * p + 1];
    if (x < minX) minX = x;
    if (y < minY) minY = y;
    if (x > maxX) maxX = x;
    if (y > maxY) maxY = y;
  }
  const conf = present ? 1 : 0;
  out[3 * outPoint] = present ? minX : 0;
  out[3 * outPoint + 1] = present ? minY : 0;
  out[3 * outPoint + 2] = conf;
  out[3 * outPoint + 3] = present ? maxX : 0;
  out[3 * outPoint + 4] = present ? maxY : 0;
  out[3 * outPoint + 5] = conf;
}

/** (D * 3) selected landmarks for one frame, in the feature-column order. */
export function selectPoints(frame: Frame, subset: Subset, out: Float64Array): void {
  switch (subset) {
    case "pose-all":
      out.set(frame);
      break;
    case "pose-body":
      copySlots(frame, 0, 25, out, 0);
      break;
    case "pose-hands":
      copySlots(frame, LEFT_HAND_START, LEFT_HAND_END, out, 0);
      copySlots(frame, RIGHT_HAND_START, RIGHT_HAND_END, out, 21);
      break;
    case "bbox":
      writeBboxCorners(frame, FACE_START, FACE_END, out, 0);
      writeBboxCorners(frame, 0, 25, out, 2);
      writeBboxCorners(frame, LEFT_HAND_START, LEFT_HAND_END, out, 4);
      writeBboxCorners(frame, RIGHT_HAND_START, RIGHT_HAND_END, out, 6);
      break;
  }
}

export class EngineSession {
  readonly model: LstmModel;
  readonly fps: number;
  readonly normMode: NormMode;
  readonly window: number;
  private readonly dim: number;
  private h: Float64Array;
  private c: Float64Array;
  private prev: Float64Array | null = null;
  private selected: Float64Array;
  private flow: Float64Array;
  private ring: number[] = [];
  private ringSum = 0;
  private frames = 0;

  constructor(config: EngineConfig) {
    this.model = config.model;
    this.fps = config.fps;
    this.normMode = config.normMode ?? config.model.normMode;
    this.window = config.window ?? TRAILING_WINDOW_FRAMES;
    this.dim = SUBSET_DIMS[config.model.subset];
    if (this.dim !== config.model.inputDim) {
      throw new Error(`model expects ${config.model.inputDim} inputs but its subset ` +
                      `${config.model.subset} provides ${this.dim}`);
    }
    if (!(this.fps > 0)) {
      throw new Error(`fps must be positive, got ${this.fps}`);
    }
    this.h = new Float64Array(this.model.hidden);
    this.c = new Float64Array(this.model.hidden);
    this.selected = new Float64Array(this.dim * 3);
    this.flow = new Float64Array(this.dim);
  }

  get frameCount(): number {
    return this.frames;
  }

  get currentScale(): number {
    if (this.normMode !== "trailing-window" || this.ring.length === 0) {
      return 1;
    }
    const mean = this.ringSum / this.ring.length;
    return mean > 0 ? 1 / mean : 1;
  }

  reset(): void {
    this.h.fill(0);
    this.c.fill(0);
    this.prev = null;
    this.ring = [];
    this.ringSum = 0;
    this.frames = 0;
  }

  step(input: Frame): StepResult {
    if (input.length !== POINT_COUNT * 3) {
      throw new Error(`expected ${POINT_COUNT} landmarks, got ${input.length / 3}`);
    }
    let frame = input;
    if (this.normMode === "trailing-window") {
      const dist = shoulderDistance(input);
      if (dist !== null) {
        this.ring.push(dist);
        this.ringSum += dist;
        if (this.ring.length > this.window) {
          this.ringSum -= this.ring.shift()!;
        }
      }
      const scale = this.currentScale;
      frame = new Float64Array(input);
      for (let p = 0; p < POINT_COUNT; p++) {
        frame[3 * p] *= scale;
        frame[3 * p + 1] *= scale;
      }
    }

    selectPoints(frame, this.model.subset, this.selected);
    if (this.prev === null) {
      this.flow.fill(0);
      this.prev = new Float64Array(this.dim * 3);
    } else {
      for (let p = 0; p < this.dim; p++) {
        const cPrev = this.prev[3 * p + 2];
        const cCur = this.selected[3 * p + 2];
        if (cPrev > 0 && cCur > 0) {
          const dx = this.selected[3 * p] - this.prev[3 * p];
          const dy = this.selected[3 * p + 1] - this.prev[3 * p + 1];
          this.flow[p] = Math.sqrt(dx * dx + dy * dy) * this.fps;
        } else {
          this.flow[p] = 0;
        }
      }
    }
    this.prev.set(this.selected);

    const [z0, z1] = lstmStep(this.model, this.h, this.c, this.flow);
    this.frames += 1;
    return {
      probability: signingProbability(z0, z1),
      signing: z1 > z0 ? 1 : 0,
      logits: [z0, z1],
    };
  }
}
