import type { Transport } from './transport.js';

export interface MixState {
  mute: boolean;
  pan: number; // -1..+1
  gain: number; // 0..2
}

export interface NoteWindowEvent {
  atSec: number;
  kind: 'note_on' | 'note_off';
  layerId: string;
  pitch: number;
  velocity: number;
  pan: number;
  gain: number;
}

/** How far ahead each scheduler pass books events (seconds). */
export const LOOKAHEAD_SEC = 0.1;
/** How often the scheduler runs (ms). */
export const SCHEDULE_INTERVAL_MS = 25;

const ATTACK_SEC = 0.005;
const RELEASE_SEC = 0.08;

function midiToHz(pitch: number): number {
  return 440 * Math.pow(2, (pitch - 69) / 12);
}

/**
 * Minimal polyphonic voice: two detuned oscillators through a gain
 * envelope and a stereo panner. Enough to audition note timing; real
 * instrument sounds are out of scope.
 */
export class SimpleSynth {
  private voices = new Map<string, { oscs: OscillatorNode[]; envelope: GainNode }>();

  constructor(private readonly ctx: AudioContext) {}

  noteOn(key: string, pitch: number, velocity: number, atTime: number, pan: number, gain: number): void {
    this.noteOff(key, atTime); // retrigger cleanly
    const envelope = this.ctx.createGain();
    envelope.gain.setValueAtTime(0, atTime);
    envelope.gain.linearRampToValueAtTime((velocity / 127) * gain * 0.18, atTime + ATTACK_SEC);

    const panner = this.ctx.createStereoPanner();
    panner.pan.value = Math.max(-1, Math.min(1, pan));
    envelope.connect(panner);
    panner.connect(this.ctx.destination);

    const oscs = [0, 1].map((i) => {
      const osc = this.ctx.createOscillator();
      osc.type = i === 0 ? 'square' : 'triangle';
      osc.frequency.value = midiToHz(pitch);
      osc.detune.value = i === 0 ? 0 : 6;
      osc.connect(envelope);
      osc.start(atTime);
      return osc;
    });
    this.voices.set(key, { oscs, envelope });
  }

  noteOff(key: string, atTime: number): void {
    const voice = this.voices.get(key);
    if (!voice) return;
    this.voices.delete(key);
    voice.envelope.gain.cancelScheduledValues(atTime);
    voice.envelope.gain.setTargetAtTime(0, atTime, RELEASE_SEC / 4);
    for (const osc of voice.oscs) osc.stop(atTime + RELEASE_SEC);
  }

  allOff(atTime: number): void {
    for (const key of [...this.voices.keys()]) this.noteOff(key, atTime);
  }
}

/**
 * Lookahead scheduler: every pass books the events of the next small
 * media window at exact AudioContext times, splitting the window when the
 * transport's loop wraps so nothing at the seam is lost or doubled.
 */
export class Scheduler {
  private timer: ReturnType<typeof setInterval> | null = null;
  private cursor = 0;

  constructor(
    private readonly ctx: AudioContext,
    private readonly synth: SimpleSynth,
    private readonly transport: Transport,
    private readonly eventsIn: (t0: number, t1: number) => NoteWindowEvent[],
  ) {}

  start(): void {
    if (this.timer) return;
    this.cursor = this.transport.currentTime();
    this.timer = setInterval(() => this.pass(), SCHEDULE_INTERVAL_MS);
    this.pass();
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
    this.synth.allOff(this.ctx.currentTime);
  }

  resync(): void {
    this.synth.allOff(this.ctx.currentTime);
    this.cursor = this.transport.currentTime();
  }

  private pass(): void {
    if (this.transport.state !== 'playing') return;
    const now = this.transport.currentTime();
    // A backward jump means the loop wrapped between passes.
    if (now + 1e-9 < this.cursor - LOOKAHEAD_SEC) this.cursor = now;

    let from = Math.max(this.cursor, now);
    let until = now + LOOKAHEAD_SEC;
    const loop = this.transport.loop;
    const windows: [number, number][] = [];
    if (loop && from < loop[1] && until >= loop[1]) {
      windows.push([from, loop[1]]);
      windows.push([loop[0], loop[0] + (until - loop[1])]);
    } else if (from < until) {
      windows.push([from, until]);
    }

    const ctxNow = this.ctx.currentTime;
    let horizon = from;
    let offsetFromNow = from - now;
    for (const [t0, t1] of windows) {
      if (t1 <= t0) continue;
      for (const event of this.eventsIn(t0, t1)) {
        const when = ctxNow + offsetFromNow + (event.atSec - t0);
        const key = `${event.layerId}:${event.pitch}`;
        if (event.kind === 'note_on') {
          this.synth.noteOn(key, event.pitch, event.velocity, when, event.pan, event.gain);
        } else {
          this.synth.noteOff(key, when);
        }
      }
      offsetFromNow += t1 - t0;
      horizon = t1;
    }
    this.cursor = horizon;
  }
}

/**
 * Plays the decoded reference audio in lockstep with the transport by
 * re-cueing a buffer source on every transport change and at loop wraps.
 */
export class AudioLanePlayback {
  private source: AudioBufferSourceNode | null = null;
  private gainNode: GainNode;
  private pannerNode: StereoPannerNode;
  private watchdog: ReturnType<typeof setInterval> | null = null;
  private cuedAt = 0;

  constructor(
    private readonly ctx: AudioContext,
    private readonly buffer: AudioBuffer,
    private readonly transport: Transport,
  ) {
    this.gainNode = ctx.createGain();
    this.pannerNode = ctx.createStereoPanner();
    this.gainNode.connect(this.pannerNode);
    this.pannerNode.connect(ctx.destination);
  }

  setMix(mix: MixState): void {
    this.gainNode.gain.value = mix.mute ? 0 : mix.gain;
    this.pannerNode.pan.value = mix.pan;
  }

  sync(): void {
    this.stopSource();
    if (this.transport.state !== 'playing') {
      if (this.watchdog) clearInterval(this.watchdog);
      this.watchdog = null;
      return;
    }
    this.cue();
    if (!this.watchdog) {
      this.watchdog = setInterval(() => {
        // Re-cue when the playhead jumped backwards (loop wrap).
        const position = this.transport.currentTime();
        if (position + 0.05 < this.cuedAt) this.sync();
        this.cuedAt = Math.max(position, this.transport.loop ? 0 : position);
        if (this.transport.state !== 'playing') this.sync();
      }, 50);
    }
  }

  private cue(): void {
    const offset = this.transport.currentTime();
    this.cuedAt = offset;
    if (offset >= this.buffer.duration) return;
    const source = this.ctx.createBufferSource();
    source.buffer = this.buffer;
    source.connect(this.gainNode);
    source.start(this.ctx.currentTime, offset);
    this.source = source;
  }

  private stopSource(): void {
    if (this.source) {
      try {
        this.source.stop();
      } catch {
        // already stopped
      }
      this.source.disconnect();
      this.source = null;
    }
  }

  dispose(): void {
    this.stopSource();
    if (this.watchdog) clearInterval(this.watchdog);
    this.watchdog = null;
  }
}
