export type Clock = () => number;

/**
 * Client-side playback clock implementing the engine's published transport
 * contract: injected wall time, clamped seeks, and a half-open A-B loop
 * [a, b) whose playhead wraps from b back to a.
 *
 * The wall clock is a constructor parameter so tests (and the scheduler)
 * can drive time deterministically.
 */
export class Transport {
  duration = 0;
  loop: [number, number] | null = null;

  private mode: 'stopped' | 'paused' | 'playing' = 'stopped';
  private pausedAt = 0;
  private anchorWall = 0;
  private anchorMedia = 0;

  constructor(private clock: Clock = () => performance.now() / 1000) {}

  setClock(clock: Clock): void {
    this.clock = clock;
  }

  get state(): 'stopped' | 'paused' | 'playing' {
    return this.mode;
  }

  play(): void {
    if (this.mode === 'playing') return;
    this.anchorMedia = this.mode === 'paused' ? this.pausedAt : this.loop ? this.loop[0] : 0;
    this.anchorWall = this.clock();
    this.mode = 'playing';
  }

  pause(): void {
    if (this.mode === 'paused') return;
    this.pausedAt = this.currentTime();
    this.mode = 'paused';
  }

  stop(): void {
    this.mode = 'stopped';
    this.pausedAt = 0;
  }

  seek(target: number): void {
    const clamped = Math.min(Math.max(0, target), this.duration);
    if (this.mode === 'playing') {
      this.anchorWall = this.clock();
      this.anchorMedia = clamped;
    } else {
      this.mode = 'paused';
      this.pausedAt = clamped;
    }
  }

  /** Store loop [a, b); while playing outside it, snap the playhead to a. */
  setLoop(a: number, b: number): void {
    const lo = Math.min(Math.max(0, a), this.duration);
    const hi = Math.min(Math.max(0, b), this.duration);
    if (lo >= hi) {
      throw new Error(`loop must satisfy a < b after clamping: [${lo}, ${hi})`);
    }
    const position = this.currentTime();
    this.loop = [lo, hi];
    if (this.mode === 'playing' && (position < lo || position >= hi)) {
      this.anchorWall = this.clock();
      this.anchorMedia = lo;
    }
  }

  /** Drop the loop; playback continues from the current position. */
  clearLoop(): void {
    if (!this.loop) return;
    if (this.mode === 'playing') {
      const position = this.currentTime();
      this.anchorWall = this.clock();
      this.anchorMedia = position;
    }
    this.loop = null;
  }

  currentTime(): number {
    if (this.mode === 'stopped') return 0;
    if (this.mode === 'paused') return this.pausedAt;
    const raw = this.anchorMedia + (this.clock() - this.anchorWall);
    if (this.loop) {
      const [a, b] = this.loop;
      if (raw < b) return Math.max(0, raw);
      const wrapped = a + ((raw - a) % (b - a));
      return wrapped >= b ? a : wrapped;
    }
    return Math.min(raw, this.duration);
  }

  /** Auto-stop at end of media; the render loop polls this. */
  tick(): void {
    if (this.mode !== 'playing' || this.loop) return;
    if (this.anchorMedia + (this.clock() - this.anchorWall) >= this.duration) {
      this.stop();
    }
  }
}
