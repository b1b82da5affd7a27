/** Mapping from 17-point webcam pose estimates onto the 137-slot layout.
 *
 * Browser pose estimators return the 17 COCO keypoints; the detector was
 * trained on a 25-point body (plus face and hands, which stay missing here).
 * Neck and mid-hip are synthesized as parent midpoints when both parents are
 * present.  For left-dominant signers the frame is mirrored about its center
 * before placement so the model sees the dominant hand where it expects it.
 */

import {
  LEFT_ANKLE, LEFT_EAR, LEFT_ELBOW, LEFT_EYE, LEFT_HIP, LEFT_KNEE,
  LEFT_SHOULDER, LEFT_WRIST, MID_HIP, NECK, NOSE,
  RIGHT_ANKLE, RIGHT_EAR, RIGHT_ELBOW, RIGHT_EYE, RIGHT_HIP, RIGHT_KNEE,
  RIGHT_SHOULDER, RIGHT_WRIST,
  Frame, emptyFrame,
} from "./skeleton.js";

export interface Keypoint {
  x: number;
  y: number;
  score: number;
}

/** The 17 keypoints in canonical COCO order. */
export type CocoKeypoints = Keypoint[];

export const COCO_ORDER = [
  "nose", "leftEye", "rightEye", "leftEar", "rightEar",
  "leftShoulder", "rightShoulder", "leftElbow", "rightElbow",
  "leftWrist", "rightWrist", "leftHip", "rightHip",
  "leftKnee", "rightKnee", "leftAnkle", "rightAnkle",
] as const;

export interface DemoConfig {
  scoreThreshold: number;   // keypoints below this are treated as missing
  signingThreshold: number; // probability above which the signing flag is on
  toneEnabled: boolean;
  toneFrequencyHz: number;
  dominantHand: "left" | "right";
  frameWidth: number;       // mirror axis for left-dominant signers
}

export const DEFAULT_CONFIG: DemoConfig = {
  scoreThreshold: 0.2,
  signingThreshold: 0.5,
  toneEnabled: false,
  toneFrequencyHz: 20000,
  dominantHand: "right",
  frameWidth: 640,
};

// COCO index -> body-25 slot
const COCO_TO_BODY = [
  NOSE, LEFT_EYE, RIGHT_EYE, LEFT_EAR, RIGHT_EAR,
  LEFT_SHOULDER, RIGHT_SHOULDER, LEFT_ELBOW, RIGHT_ELBOW,
  LEFT_WRIST, RIGHT_WRIST, LEFT_HIP, RIGHT_HIP,
  LEFT_KNEE, RIGHT_KNEE, LEFT_ANKLE, RIGHT_ANKLE,
];

// left/right swaps within COCO order, used when mirroring
const COCO_MIRROR = [0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15];

/** The body slots map_keypoints can populate (17 mapped + neck + mid hip). */
export const MAPPED_BODY_SLOTS = [...COCO_TO_BODY, NECK, MID_HIP];

/** Mirror keypoints about the vertical center line of a frame. */
export function mirrorKeypoints(keypoints: CocoKeypoints, frameWidth: number): CocoKeypoints {
  return COCO_MIRROR.map((src) => ({
    x: frameWidth - keypoints[src].x,
    y: keypoints[src].y,
    score: keypoints[src].score,
  }));
}

function midpoint(frame: Frame, a: number, b: number, target: number): void {
  if (frame[3 * a + 2] > 0 && frame[3 * b + 2] > 0) {
    frame[3 * target] = (frame[3 * a] + frame[3 * b]) / 2;
    frame[3 * target + 1] = (frame[3 * a + 1] + frame[3 * b + 1]) / 2;
    frame[3 * target + 2] = 1;
  }
}

export function mapKeypoints(keypoints: CocoKeypoints, config: DemoConfig): Frame {
  if (keypoints.length !== 17) {
    throw new Error(`expected 17 keypoints, got ${keypoints.length}`);
  }
  const points = config.dominantHand === "left"
    ? mirrorKeypoints(keypoints, config.frameWidth)
    : keypoints;
  const frame = emptyFrame();
  for (let i = 0; i < 17; i++) {
    const kp = points[i];
    if (kp.score < config.scoreThreshold) {
      continue;
    }
    const slot = COCO_TO_BODY[i];
    frame[3 * slot] = kp.x;
    frame[3 * slot + 1] = kp.y;
    frame[3 * slot + 2] = 1;
  }
  midpoint(frame, LEFT_SHOULDER, RIGHT_SHOULDER, NECK);
  midpoint(frame, LEFT_HIP, RIGHT_HIP, MID_HIP);
  return frame;
}
