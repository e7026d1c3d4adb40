import type { HighlightKind, NoteJson, PeaksJson, PedalJson, ViewportJson } from './types.js';

/** One track as the canvas sees it. */
export interface LayerView {
  id: string;
  kind: 'audio' | 'midi';
  colorHex: string;
  alpha: number;
  visible: boolean;
  sustainVisible: boolean;
}

export interface RollView {
  layers: LayerView[];
  notes: Record<string, NoteJson[]>;
  pedal: Record<string, PedalJson[]>;
  viewport: ViewportJson;
  peaks: PeaksJson | null;
  highlights: Record<string, HighlightKind[]>;
  playheadSec: number | null;
  loop: [number, number] | null;
}

export type DrawOp =
  | { op: 'clear' }
  | { op: 'loopShade'; x0: number; x1: number }
  | { op: 'wave'; layerId: string; colorHex: string; tops: number[]; bottoms: number[] }
  | { op: 'band'; layerId: string; x: number; w: number; colorHex: string }
  | {
      op: 'rect';
      layerId: string;
      noteIndex: number;
      x: number;
      y: number;
      w: number;
      h: number;
      colorHex: string;
      alpha: number;
      highlight: HighlightKind;
    }
  | { op: 'playhead'; x: number };

const NOTE_HEIGHT_FRACTION = 0.9;
const WAVE_AMPLITUDE_FRACTION = 0.45;

/**
 * Pure projection of engine state to canvas geometry. Everything the
 * painter draws is derived here, so tests can assert on the list without
 * rasterizing anything.
 */
export function computeDrawList(view: RollView, width: number, height: number): DrawOp[] {
  const vp = view.viewport;
  const pxPerSec = width / (vp.timeEnd - vp.timeStart);
  const rowHeight = height / (vp.pitchMax - vp.pitchMin + 1);
  const ops: DrawOp[] = [{ op: 'clear' }];

  if (view.loop) {
    const [a, b] = view.loop;
    const x0 = Math.max(0, (a - vp.timeStart) * pxPerSec);
    const x1 = Math.min(width, (b - vp.timeStart) * pxPerSec);
    if (x1 > x0) ops.push({ op: 'loopShade', x0, x1 });
  }

  const audioLayer = view.layers.find((layer) => layer.kind === 'audio');
  if (audioLayer && audioLayer.visible && view.peaks) {
    ops.push(waveOp(view.peaks, audioLayer, vp, width, height));
  }

  for (const layer of view.layers) {
    if (layer.kind !== 'midi' || !layer.visible || !layer.sustainVisible) continue;
    for (const span of view.pedal[layer.id] ?? []) {
      if (span.endSec <= vp.timeStart || span.startSec >= vp.timeEnd) continue;
      const x = Math.max(0, (span.startSec - vp.timeStart) * pxPerSec);
      const right = Math.min(width, (span.endSec - vp.timeStart) * pxPerSec);
      if (right > x) ops.push({ op: 'band', layerId: layer.id, x, w: right - x, colorHex: layer.colorHex });
    }
  }

  for (const layer of view.layers) {
    if (layer.kind !== 'midi' || !layer.visible) continue;
    const highlights = view.highlights[layer.id] ?? [];
    (view.notes[layer.id] ?? []).forEach((note, noteIndex) => {
      if (note.pitch < vp.pitchMin || note.pitch > vp.pitchMax) return;
      if (note.offsetSec <= vp.timeStart || note.onsetSec >= vp.timeEnd) return;
      let x = Math.max(0, (note.onsetSec - vp.timeStart) * pxPerSec);
      const right = Math.min(width, (note.offsetSec - vp.timeStart) * pxPerSec);
      const w = Math.max(1, right - x);
      if (x + w > width) x = width - w;
      ops.push({
        op: 'rect',
        layerId: layer.id,
        noteIndex,
        x,
        y: (vp.pitchMax - note.pitch) * rowHeight,
        w,
        h: rowHeight * NOTE_HEIGHT_FRACTION,
        colorHex: layer.colorHex,
        alpha: layer.alpha,
        highlight: highlights[noteIndex] ?? 'neutral',
      });
    });
  }

  if (view.playheadSec !== null && view.playheadSec >= vp.timeStart && view.playheadSec <= vp.timeEnd) {
    ops.push({ op: 'playhead', x: (view.playheadSec - vp.timeStart) * pxPerSec });
  }
  return ops;
}

function waveOp(
  peaks: PeaksJson,
  layer: LayerView,
  vp: ViewportJson,
  width: number,
  height: number,
): DrawOp {
  const columns = Math.max(1, Math.floor(width));
  const pairs = peaksForWindow(peaks, vp.timeStart, vp.timeEnd, columns);
  const mid = height / 2;
  const amp = height * WAVE_AMPLITUDE_FRACTION;
  return {
    op: 'wave',
    layerId: layer.id,
    colorHex: layer.colorHex,
    tops: pairs.map(([, high]) => mid - high * amp),
    bottoms: pairs.map(([low]) => mid - low * amp),
  };
}

/**
 * Column aggregation over the engine-computed peak pyramid: choose the
 * coarsest level no finer than one column, then min/max the buckets each
 * column covers. Columns past the end of the audio read as silence.
 */
export function peaksForWindow(
  peaks: PeaksJson,
  t0: number,
  t1: number,
  columns: number,
): [number, number][] {
  const columnSec = (t1 - t0) / columns;
  let level = peaks.levels[0];
  for (const candidate of peaks.levels) {
    if (candidate.bucketSizeSamples / peaks.sampleRate <= columnSec) level = candidate;
  }
  const bucket = level.bucketSizeSamples;
  const out: [number, number][] = [];
  for (let i = 0; i < columns; i++) {
    const s0 = Math.max(0, Math.floor((t0 + i * columnSec) * peaks.sampleRate));
    const s1 = Math.ceil((t0 + (i + 1) * columnSec) * peaks.sampleRate);
    const j0 = Math.floor(s0 / bucket);
    const j1 = Math.min(level.min.length, Math.ceil(s1 / bucket));
    if (s1 <= 0 || j0 >= j1) {
      out.push([0, 0]);
      continue;
    }
    let low = Infinity;
    let high = -Infinity;
    for (let j = j0; j < j1; j++) {
      if (level.min[j] < low) low = level.min[j];
      if (level.max[j] > high) high = level.max[j];
    }
    out.push([low, high]);
  }
  return out;
}

export function rgbaToHex(color: [number, number, number, number]): string {
  const [r, g, b] = color;
  const hex = (v: number) => v.toString(16).padStart(2, '0').toUpperCase();
  return `#${hex(r)}${hex(g)}${hex(b)}`;
}
