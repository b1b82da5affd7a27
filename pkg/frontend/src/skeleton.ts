/** Landmark layout shared with the backend: 137 points of (x, y, confidence). */

export const POINT_COUNT = 137;

export const BODY_START = 0;
export const BODY_END = 25;
export const FACE_START = 25;
export const FACE_END = 95;
export const LEFT_HAND_START = 95;
export const LEFT_HAND_END = 116;
export const RIGHT_HAND_START = 116;
export const RIGHT_HAND_END = 137;

// body-25 indices
export const NOSE = 0;
export const NECK = 1;
export const RIGHT_SHOULDER = 2;
export const RIGHT_ELBOW = 3;
export const RIGHT_WRIST = 4;
export const LEFT_SHOULDER = 5;
export const LEFT_ELBOW = 6;
export const LEFT_WRIST = 7;
export const MID_HIP = 8;
export const RIGHT_HIP = 9;
export const RIGHT_KNEE = 10;
export const RIGHT_ANKLE = 11;
export const LEFT_HIP = 12;
export const LEFT_KNEE = 13;
export const LEFT_ANKLE = 14;
export const RIGHT_EYE = 15;
export const LEFT_EYE = 16;
export const RIGHT_EAR = 17;
export const LEFT_EAR = 18;

export type Subset = "pose-all" | "pose-body" | "pose-hands" | "bbox";
export type NormMode = "per-sequence" | "trailing-window";

export const SUBSET_DIMS: Record<Subset, number> = {
  "pose-all": 137,
  "pose-body": 25,
  "pose-hands": 42,
  "bbox": 8,
};

/** A pose frame packed as [x0, y0, c0, x1, y1, c1, ...], length 137 * 3. */
export type Frame = Float64Array;

export function emptyFrame(): Frame {
  return new Float64Array(POINT_COUNT * 3);
}

/** Build a frame from 137 [x, y, confidence] triples (the stream protocol shape). */
export function frameFromTriples(points: number[][]): Frame {
  if (points.length !== POINT_COUNT) {
    throw new Error(`expected ${POINT_COUNT} points, got ${points.length}`);
  }
  const frame = emptyFrame();
  for (let i = 0; i < POINT_COUNT; i++) {
    frame[3 * i] = points[i][0];
    frame[3 * i + 1] = points[i][1];
    frame[3 * i + 2] = points[i][2];
  }
  return frame;
}
