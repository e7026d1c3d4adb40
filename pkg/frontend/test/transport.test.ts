import { describe, expect, it } from 'vitest';

import { Transport } from '../src/transport.js';

function makeTransport(duration: number): { transport: Transport; tick: (dt: number) => void } {
  let now = 1000;
  const transport = new Transport(() => now);
  transport.duration = duration;
  return {
    transport,
    tick: (dt: number) => {
      now += dt;
    },
  };
}

describe('Transport', () => {
  it('starts stopped at zero', () => {
    const { transport } = makeTransport(10);
    expect(transport.state).toBe('stopped');
    expect(transport.currentTime()).toBe(0);
  });

  it('plays linearly and pauses where it is', () => {
    const { transport, tick } = makeTransport(10);
    transport.play();
    tick(2.5);
    expect(transport.currentTime()).toBeCloseTo(2.5, 9);
    transport.pause();
    tick(100);
    expect(transport.currentTime()).toBeCloseTo(2.5, 9);
  });

  it('clamps seeks into [0, duration]', () => {
    const { transport } = makeTransport(10);
    transport.seek(-5);
    expect(transport.currentTime()).toBe(0);
    transport.seek(99);
    expect(transport.currentTime()).toBe(10);
  });

  it('re-anchors on seek while playing', () => {
    const { transport, tick } = makeTransport(10);
    transport.play();
    tick(3);
    transport.seek(7);
    expect(transport.currentTime()).toBeCloseTo(7, 9);
    tick(1);
    expect(transport.currentTime()).toBeCloseTo(8, 9);
  });

  it('wraps a half-open loop from b back to a', () => {
    const { transport, tick } = makeTransport(10);
    transport.seek(2);
    transport.play();
    transport.setLoop(2, 4);
    tick(5); // 2 + (5 mod 2) = 3
    expect(transport.currentTime()).toBeCloseTo(3, 9);
    for (let i = 0; i < 50; i++) {
      tick(0.13);
      const position = transport.currentTime();
      expect(position).toBeGreaterThanOrEqual(2);
      expect(position).toBeLessThan(4);
    }
  });

  it('snaps to a when the loop is set while playing outside it', () => {
    const { transport, tick } = makeTransport(10);
    transport.play();
    tick(0.5);
    transport.setLoop(2, 4);
    expect(transport.currentTime()).toBeCloseTo(2, 9);
  });

  it('keeps position when the loop is set while paused', () => {
    const { transport } = makeTransport(10);
    transport.seek(1);
    transport.setLoop(2, 4);
    expect(transport.currentTime()).toBeCloseTo(1, 9);
  });

  it('clearing the loop continues without a jump', () => {
    const { transport, tick } = makeTransport(10);
    transport.seek(2);
    transport.play();
    transport.setLoop(2, 4);
    tick(5);
    transport.clearLoop();
    expect(transport.currentTime()).toBeCloseTo(3, 9);
    tick(1);
    expect(transport.currentTime()).toBeCloseTo(4, 9);
  });

  it('rejects an empty loop', () => {
    const { transport } = makeTransport(10);
    expect(() => transport.setLoop(4, 2)).toThrow();
  });

  it('plays from loop start when started stopped with a loop', () => {
    const { transport } = makeTransport(10);
    transport.setLoop(2, 4);
    transport.play();
    expect(transport.currentTime()).toBeCloseTo(2, 9);
  });

  it('auto-stops at end of media via tick()', () => {
    const { transport, tick } = makeTransport(10);
    transport.play();
    tick(10.5);
    expect(transport.currentTime()).toBe(10);
    transport.tick();
    expect(transport.state).toBe('stopped');
    expect(transport.currentTime()).toBe(0);
  });
});
