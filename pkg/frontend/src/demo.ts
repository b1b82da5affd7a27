/** Browser demo: webcam -> pose estimator adapter -> engine -> meter + tone.
 *
 * No pose network ships with the demo; plug one in by registering an adapter
 * (see README).  Inference is entirely on-device: after the model file loads
 * there are no further network calls.
 */

import { EngineSession } from "./engine.js";
import { CocoKeypoints, DEFAULT_CONFIG, DemoConfig, mapKeypoints } from "./mapKeypoints.js";
import { ModelLoadError, parseModel } from "./model.js";
import { PresenceTone, WebAudioToneSink } from "./tone.js";

export interface PoseEstimator {
  /** 17 COCO keypoints for the current video frame, or null when nobody is visible. */
  estimate(video: HTMLVideoElement): Promise<CocoKeypoints | null>;
}

export interface UiState {
  probability: number;
  signing: boolean;
  fpsEstimate: number;
}

declare global {
  interface Window {
    registerPoseEstimator?: (estimator: PoseEstimator) => void;
  }
}

const NOBODY: CocoKeypoints = Array.from({ length: 17 }, () => ({ x: 0, y: 0, score: 0 }));

export class DemoLoop {
  private readonly session: EngineSession;
  private readonly estimator: PoseEstimator;
  private readonly config: DemoConfig;
  private readonly tone: PresenceTone;
  private readonly onState: (state: UiState) => void;
  private lastFrameAt = 0;
  private fpsEstimate = 0;
  private busy = false;
  private stopped = false;

  constructor(session: EngineSession, estimator: PoseEstimator, config: DemoConfig,
              tone: PresenceTone, onState: (state: UiState) => void) {
    this.session = session;
    this.estimator = estimator;
    this.config = config;
    this.tone = tone;
    this.onState = onState;
  }

  /** One camera frame; frames arriving while the estimator runs are dropped. */
  async onFrame(video: HTMLVideoElement): Promise<void> {
    if (this.busy || this.stopped) {
      return;
    }
    this.busy = true;
    try {
      const keypoints = (await this.estimator.estimate(video)) ?? NOBODY;
      const frame = mapKeypoints(keypoints, this.config);
      const result = this.session.step(frame);
      const signing = result.probability >= this.config.signingThreshold;
      this.tone.update(signing);

      const at = performance.now();
      if (this.lastFrameAt > 0) {
        const instant = 1000 / (at - this.lastFrameAt);
        this.fpsEstimate = this.fpsEstimate === 0
          ? instant
          : 0.9 * this.fpsEstimate + 0.1 * instant;
      }
      this.lastFrameAt = at;
      this.onState({ probability: result.probability, signing, fpsEstimate: this.fpsEstimate });
    } finally {
      this.busy = false;
    }
  }

  stop(): void {
    this.stopped = true;
    this.tone.dispose();
  }
}

function show(element: HTMLElement, message: string): void {
  element.textContent = message;
}

export async function startDemo(root: Document = document): Promise<void> {
  const video = root.getElementById("camera") as HTMLVideoElement;
  const meter = root.getElementById("meter-fill") as HTMLElement;
  const status = root.getElementById("status") as HTMLElement;
  const toneBox = root.getElementById("tone-enabled") as HTMLInputElement;
  const handSelect = root.getElementById("dominant-hand") as HTMLSelectElement;

  const config: DemoConfig = { ...DEFAULT_CONFIG };

  let estimator: PoseEstimator | null = null;
  window.registerPoseEstimator = (e) => {
    estimator = e;
    show(status, "pose estimator registered");
  };

  let modelBuffer: ArrayBuffer;
  try {
    const response = await fetch("fixtures/model.sgns");
    if (!response.ok) {
      throw new ModelLoadError(`model fetch failed: HTTP ${response.status}`);
    }
    modelBuffer = await response.arrayBuffer();
  } catch (e) {
    show(status, `model unavailable: ${e}`);
    return;
  }
  const model = parseModel(modelBuffer);

  try {
    const stream = await navigator.mediaDevices.getUserMedia({ video: true });
    video.srcObject = stream;
    await video.play();
  } catch (e) {
    show(status, `camera unavailable: ${e}`);
    return;
  }
  config.frameWidth = video.videoWidth || config.frameWidth;

  const session = new EngineSession({ model, fps: 25, normMode: "trailing-window" });
  const tone = new PresenceTone(new WebAudioToneSink(),
                                { enabled: toneBox.checked, frequencyHz: config.toneFrequencyHz });
  toneBox.addEventListener("change", () => { tone.enabled = toneBox.checked; });
  handSelect.addEventListener("change", () => {
    config.dominantHand = handSelect.value === "left" ? "left" : "right";
  });

  const loop = new DemoLoop(session, {
    estimate: (v) => estimator ? estimator.estimate(v) : Promise.resolve(null),
  }, config, tone, (state) => {
    meter.style.width = `${Math.round(state.probability * 100)}%`;
    meter.classList.toggle("signing", state.signing);
    show(status, estimator
      ? `p(signing) ${state.probability.toFixed(2)} at ${state.fpsEstimate.toFixed(0)} fps`
      : "waiting for a pose estimator (see README)");
  });

  const tick = async () => {
    await loop.onFrame(video);
    requestAnimationFrame(tick);
  };
  requestAnimationFrame(tick);
}
