/** Parser and inference math for the backend's binary model format.
 *
 * Layout, little-endian: magic "SGNS", version u16, kind u8, subset u8,
 * normalization u8, two u32 dims, then every parameter array as float32.
 * The gate axis is packed input, forget, candidate, output.  Only the
 * recurrent kind runs in the browser.
 */

import { NormMode, Subset } from "./skeleton.js";

export class ModelLoadError extends Error {}

const MAGIC = 0x53474e53; // "SGNS" big-endian read of the 4 magic bytes
const KIND_LSTM = 1;
const SUBSETS: Subset[] = ["pose-all", "pose-body", "pose-hands", "bbox"];
const NORMS: NormMode[] = ["per-sequence", "trailing-window"];

export interface LstmModel {
  inputDim: number;
  hidden: number;
  wX: Float32Array;    // (4H, D) row-major
  wH: Float32Array;    // (4H, H)
  b: Float32Array;     // (4H)
  wProj: Float32Array; // (2, H)
  bProj: Float32Array; // (2)
  subset: Subset;
  normMode: NormMode;
}

export function parseModel(buffer: ArrayBuffer): LstmModel {
  const view = new DataView(buffer);
  if (buffer.byteLength < 17) {
    throw new ModelLoadError(`model file truncated at ${buffer.byteLength} bytes`);
  }
  if (view.getUint32(0, false) !== MAGIC) {
    throw new ModelLoadError("bad magic bytes (not a model file)");
  }
  const version = view.getUint16(4, true);
  if (version !== 1) {
    throw new ModelLoadError(`unsupported model format version ${version}`);
  }
  const kind = view.getUint8(6);
  if (kind !== KIND_LSTM) {
    throw new ModelLoadError("the browser engine runs recurrent models only");
  }
  const subset = SUBSETS[view.getUint8(7)];
  const normMode = NORMS[view.getUint8(8)];
  if (subset === undefined || normMode === undefined) {
    throw new ModelLoadError("unknown subset or normalization code");
  }
  const inputDim = view.getUint32(9, true);
  const hidden = view.getUint32(13, true);
  const counts = [4 * hidden * inputDim, 4 * hidden * hidden, 4 * hidden, 2 * hidden, 2];
  const expected = 17 + 4 * counts.reduce((a, v) => a + v, 0);
  if (buffer.byteLength !== expected) {
    throw new ModelLoadError(
      `payload is ${buffer.byteLength - 17} bytes, expected ${expected - 17}`);
  }
  let offset = 17;
  const take = (count: number) => {
    const arr = new Float32Array(count);
    for (let i = 0; i < count; i++) {
      arr[i] = view.getFloat32(offset, true);
      offset += 4;
    }
    return arr;
  };
  return {
    inputDim,
    hidden,
    wX: take(counts[0]),
    wH: take(counts[1]),
    b: take(counts[2]),
    wProj: take(counts[3]),
    bProj: take(counts[4]),
    subset,
    normMode,
  };
}

function sigmoid(v: number): number {
  return 1 / (1 + Math.exp(-v));
}

/**
 * One LSTM step.  Updates h and c in place and returns the two logits.
 * All math runs in float64 on the float32 parameter values, matching the
 * backend's numerics.
 */
export function lstmStep(
  model: LstmModel, h: Float64Array, c: Float64Array, x: Float64Array,
): [number, number] {
  const H = model.hidden;
  const D = model.inputDim;
  const pre = new Float64Array(4 * H);
  for (let row = 0; row < 4 * H; row++) {
    let acc = model.b[row];
    const xBase = row * D;
    for (let col = 0; col < D; col++) {
      acc += model.wX[xBase + col] * x[col];
    }
    const hBase = row * H;
    for (let col = 0; col < H; col++) {
      acc += model.wH[hBase + col] * h[col];
    }
    pre[row] = acc;
  }
  for (let j = 0; j < H; j++) {
    const iGate = sigmoid(pre[j]);
    const fGate = sigmoid(pre[H + j]);
    const gCand = Math.tanh(pre[2 * H + j]);
    const oGate = sigmoid(pre[3 * H + j]);
    c[j] = fGate * c[j] + iGate * gCand;
    h[j] = oGate * Math.tanh(c[j]);
  }
  let z0 = model.bProj[0];
  let z1 = model.bProj[1];
  for (let j = 0; j < H; j++) {
    z0 += model.wProj[j] * h[j];
    z1 += model.wProj[H + j] * h[j];
  }
  return [z0, z1];
}

/** Signing probability from the two logits (stable softmax component 1). */
export function signingProbability(z0: number, z1: number): number {
  const m = Math.max(z0, z1);
  const e0 = Math.exp(z0 - m);
  const e1 = Math.exp(z1 - m);
  return e1 / (e0 + e1);
}
