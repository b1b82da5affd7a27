/** Ultrasonic presence tone: on while signing, with a release hysteresis.
 *
 * Videoconferencing floor control reacts to audio; a 20 kHz sine is outside
 * the audible range but still trips speech detection.  The 100 ms release
 * hysteresis keeps the oscillator from chattering (and crackling under
 * compression) when the signing flag flickers.
 */

export interface ToneSink {
  start(frequencyHz: number): void;
  stop(): void;
}

export interface ToneOptions {
  enabled: boolean;
  frequencyHz?: number;
  releaseMs?: number;
  now?: () => number;
}

export class PresenceTone {
  private readonly sink: ToneSink;
  private readonly frequencyHz: number;
  private readonly releaseMs: number;
  private readonly now: () => number;
  enabled: boolean;
  private playing = false;
  private lastSigningAt = -Infinity;

  constructor(sink: ToneSink, options: ToneOptions) {
    this.sink = sink;
    this.enabled = options.enabled;
    this.frequencyHz = options.frequencyHz ?? 20000;
    this.releaseMs = options.releaseMs ?? 100;
    this.now = options.now ?? (() => performance.now());
  }

  get isPlaying(): boolean {
    return this.playing;
  }

  /** Feed the per-frame signing flag; starts/stops the sink as needed. */
  update(signing: boolean): void {
    if (!this.enabled) {
      if (this.playing) {
        this.sink.stop();
        this.playing = false;
      }
      return;
    }
    const at = this.now();
    if (signing) {
      this.lastSigningAt = at;
      if (!this.playing) {
        this.sink.start(this.frequencyHz);
        this.playing = true;
      }
      return;
    }
    if (this.playing && at - this.lastSigningAt >= this.releaseMs) {
      this.sink.stop();
      this.playing = false;
    }
  }

  dispose(): void {
    if (this.playing) {
      this.sink.stop();
      this.playing = false;
    }
  }
}

/** WebAudio-backed sink; constructing it requires a prior user gesture. */
export class WebAudioToneSink implements ToneSink {
  private context: AudioContext | null = null;
  private oscillator: OscillatorNode | null = null;
  private gain: GainNode | null = null;

  start(frequencyHz: number): void {
    if (!this.context) {
      this.context = new AudioContext();
      this.gain = new GainNode(this.context, { gain: 0.5 });
      this.gain.connect(this.context.destination);
    }
    if (this.oscillator) {
      return;
    }
    this.oscillator = this.context.createOscillator();
    this.oscillator.type = "sine";
    this.oscillator.frequency.value = frequencyHz;
    this.oscillator.connect(this.gain!);
    this.oscillator.start();
  }

  stop(): void {
    if (this.oscillator) {
      this.oscillator.stop();
      this.oscillator.disconnect();
      this.oscillator = null;
    }
  }
}
