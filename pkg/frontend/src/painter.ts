import type { DrawOp } from './drawlist.js';

const LOOP_SHADE = 'rgba(255, 200, 40, 0.18)';
const PEDAL_ALPHA = 0.15;
const WAVE_ALPHA = 0.35;
const PLAYHEAD_COLOR = '#FF3333';

const HIGHLIGHT_DASH: Record<string, number[]> = {
  matched: [],
  missed: [4, 2],
  extra: [1.5, 1.5],
};

/** Replay a draw list onto a 2D context. Nothing is computed here. */
export function paint(
  ctx: CanvasRenderingContext2D,
  ops: DrawOp[],
  width: number,
  height: number,
): void {
  for (const op of ops) {
    switch (op.op) {
      case 'clear':
        ctx.clearRect(0, 0, width, height);
        ctx.fillStyle = '#FFFFFF';
        ctx.globalAlpha = 1;
        ctx.fillRect(0, 0, width, height);
        break;
      case 'loopShade':
        ctx.fillStyle = LOOP_SHADE;
        ctx.globalAlpha = 1;
        ctx.fillRect(op.x0, 0, op.x1 - op.x0, height);
        break;
      case 'wave': {
        ctx.fillStyle = op.colorHex;
        ctx.globalAlpha = WAVE_ALPHA;
        ctx.beginPath();
        op.tops.forEach((y, i) => (i === 0 ? ctx.moveTo(i + 0.5, y) : ctx.lineTo(i + 0.5, y)));
        for (let i = op.bottoms.length - 1; i >= 0; i--) {
          ctx.lineTo(i + 0.5, op.bottoms[i]);
        }
        ctx.closePath();
        ctx.fill();
        ctx.globalAlpha = 1;
        break;
      }
      case 'band':
        ctx.fillStyle = op.colorHex;
        ctx.globalAlpha = PEDAL_ALPHA;
        ctx.fillRect(op.x, 0, op.w, height);
        ctx.globalAlpha = 1;
        break;
      case 'rect':
        ctx.fillStyle = op.colorHex;
        ctx.globalAlpha = op.alpha;
        ctx.fillRect(op.x, op.y, op.w, op.h);
        ctx.globalAlpha = 1;
        if (op.highlight !== 'neutral') {
          ctx.strokeStyle = '#000000';
          ctx.lineWidth = op.highlight === 'matched' ? 2 : 1.5;
          ctx.setLineDash(HIGHLIGHT_DASH[op.highlight]);
          ctx.strokeRect(op.x, op.y, op.w, op.h);
          ctx.setLineDash([]);
        }
        break;
      case 'playhead':
        ctx.strokeStyle = PLAYHEAD_COLOR;
        ctx.lineWidth = 1.5;
        ctx.beginPath();
        ctx.moveTo(op.x, 0);
        ctx.lineTo(op.x, height);
        ctx.stroke();
        break;
    }
  }
}
