// DOM-level tests of <wave-roll> against a live engine serve instance.

import { spawn, type ChildProcess } from 'node:child_process';
import { fileURLToPath } from 'node:url';
import path from 'node:path';

import { afterAll, beforeAll, beforeEach, describe, expect, it } from 'vitest';

import { WaveRollElement } from '../src/element.js';
import { recordingContextOf } from './setup.js';

const FIXTURES_DIR = path.join(path.dirname(fileURLToPath(import.meta.url)), 'fixtures');

let serverProcess: ChildProcess | null = null;
let baseUrl = '';

function startServer(): Promise<string> {
  return new Promise((resolve, reject) => {
    const proc = spawn('python3', ['-m', 'rolldiff', 'serve', 'manifest.json', '--port', '0'], {
      cwd: FIXTURES_DIR,
      stdio: ['ignore', 'pipe', 'pipe'],
    });
    serverProcess = proc;
    let output = '';
    let errors = '';
    const timer = setTimeout(
      () => reject(new Error(`engine server did not start\nstdout: ${output}\nstderr: ${errors}`)),
      15000,
    );
    proc.stdout!.on('data', (chunk: Buffer) => {
      output += chunk.toString();
      const match = output.match(/serving on (http:\/\/[\d.:]+)/);
      if (match) {
        clearTimeout(timer);
        resolve(match[1]);
      }
    });
    proc.stderr!.on('data', (chunk: Buffer) => {
      errors += chunk.toString();
    });
    proc.on('error', (error) => {
      clearTimeout(timer);
      reject(error);
    });
  });
}

const MANIFEST = JSON.stringify([
  { path: 'gt.wav', name: 'Audio', type: 'audio' },
  { path: 'gt.mid', name: 'Ground Truth', type: 'midi' },
  { path: 'my_model.mid', name: 'My Model', type: 'midi' },
]);

async function mount(files: string = MANIFEST): Promise<WaveRollElement> {
  const el = document.createElement('wave-roll') as WaveRollElement;
  el.setAttribute('base', baseUrl);
  el.setAttribute('files', files);
  document.body.appendChild(el);
  await el.ready;
  return el;
}

beforeAll(async () => {
  baseUrl = await startServer();
  if (!customElements.get('wave-roll')) {
    customElements.define('wave-roll', WaveRollElement);
  }
});

afterAll(() => {
  serverProcess?.kill();
});

beforeEach(() => {
  document.body.innerHTML = '';
});

const shadow = (el: WaveRollElement) => el.shadowRoot!;
const rectOps = (el: WaveRollElement, layerId?: string) =>
  el.drawList.filter(
    (op) => op.op === 'rect' && (layerId === undefined || (op as { layerId: string }).layerId === layerId),
  );

describe('<wave-roll> mounting', () => {
  it('renders three track rows and a non-empty canvas', async () => {
    const el = await mount();
    const rows = shadow(el).querySelectorAll('.track-row');
    expect(rows).toHaveLength(3);
    const names = [...rows].map((row) => row.querySelector('.track-name')!.textContent);
    expect(names).toEqual(['Audio', 'Ground Truth', 'My Model']);

    expect(rectOps(el).length).toBeGreaterThan(0);
    expect(el.drawList.some((op) => op.op === 'wave')).toBe(true);

    const canvas = shadow(el).querySelector('canvas.roll') as HTMLCanvasElement;
    const ctx = recordingContextOf(canvas);
    expect(ctx.countCalls('fillRect')).toBeGreaterThan(rectOps(el).length);
  });

  it('shows an empty-state message for files="[]"', async () => {
    const el = await mount('[]');
    expect(shadow(el).querySelector('.empty-state')).not.toBeNull();
    expect(shadow(el).querySelectorAll('.track-row')).toHaveLength(0);
  });

  it('renders the good layers and an error badge for a bad path', async () => {
    const el = await mount(
      JSON.stringify([
        { path: 'gt.mid', name: 'Ground Truth', type: 'midi' },
        { path: 'ghost.mid', name: 'Ghost', type: 'midi' },
        { path: 'my_model.mid', name: 'My Model', type: 'midi' },
      ]),
    );
    const rows = shadow(el).querySelectorAll('.track-row');
    expect(rows).toHaveLength(3);
    const badges = shadow(el).querySelectorAll('.error-badge');
    expect(badges).toHaveLength(1);
    expect(badges[0].closest('.track-row')!.querySelector('.track-name')!.textContent).toBe('Ghost');
    expect(rectOps(el, 'ground-truth').length).toBeGreaterThan(0);
    expect(rectOps(el, 'my-model').length).toBeGreaterThan(0);
  });

  it('announces visual-only mode when AudioContext is unavailable', async () => {
    const el = await mount();
    expect(shadow(el).querySelector('.notice')!.textContent).toContain('visual-only');
  });
});

describe('<wave-roll> interaction', () => {
  it('toggling a layer checkbox removes its rectangles on the next refresh', async () => {
    const el = await mount();
    expect(rectOps(el, 'my-model').length).toBeGreaterThan(0);

    const checkbox = shadow(el).querySelector<HTMLInputElement>(
      '.track-row[data-layer="my-model"] .track-visible',
    )!;
    checkbox.checked = false;
    checkbox.dispatchEvent(new Event('change'));

    expect(rectOps(el, 'my-model')).toHaveLength(0);
    expect(rectOps(el, 'ground-truth').length).toBeGreaterThan(0);

    checkbox.checked = true;
    checkbox.dispatchEvent(new Event('change'));
    expect(rectOps(el, 'my-model').length).toBeGreaterThan(0);
  });

  it('wraps the playhead inside a [2, 4) loop while playing', async () => {
    const el = await mount();
    let now = 100;
    el.transport.setClock(() => now);

    el.setLoop(2, 4);
    el.play();
    now += 0.5; // media 2.5
    el.refresh();
    expect(el.transport.currentTime()).toBeCloseTo(2.5, 6);

    now += 2.0; // raw media 4.5 wraps to 2.5
    el.refresh();
    expect(el.transport.currentTime()).toBeCloseTo(2.5, 6);

    now += 4.0; // raw 8.5 -> 2 + (6.5 mod 2) = 2.5
    const ops = el.refresh();
    const position = el.transport.currentTime();
    expect(position).toBeGreaterThanOrEqual(2);
    expect(position).toBeLessThan(4);

    const playhead = ops.find((op) => op.op === 'playhead') as { x: number };
    const vp = (await fetchDocument()).viewport;
    const pxPerSec = 960 / (vp.timeEnd - vp.timeStart);
    expect(playhead.x).toBeCloseTo((position - vp.timeStart) * pxPerSec, 4);
  });

  it('seeking by fraction moves the playhead', async () => {
    const el = await mount();
    el.seekFraction(0.5);
    const doc = await fetchDocument();
    expect(el.transport.currentTime()).toBeCloseTo(doc.viewport.timeEnd / 2, 6);
  });

  it('re-highlights after a tolerance change with engine-equal counts', async () => {
    const el = await mount();
    const defaults = await fetchDocument();
    expect(el.highlightCounts).toEqual({
      matched: defaults.reports[0].pairs.length,
      missed: defaults.reports[0].missedRef.length,
      extra: defaults.reports[0].extraEst.length,
    });
    const defaultHighlighted = highlightedCounts(el);

    await el.setTolerance(0.35);
    const wide = await fetchDocument(0.35);
    expect(el.highlightCounts).toEqual({
      matched: wide.reports[0].pairs.length,
      missed: wide.reports[0].missedRef.length,
      extra: wide.reports[0].extraEst.length,
    });
    expect(wide.reports[0].pairs.length).toBeGreaterThan(defaults.reports[0].pairs.length);

    // The canvas styling followed: per-note highlight kinds now match the
    // wide-tolerance report, note for note.
    const wideHighlighted = highlightedCounts(el);
    expect(wideHighlighted.matched).toBe(wide.reports[0].pairs.length * 2);
    expect(wideHighlighted.missed).toBe(wide.reports[0].missedRef.length);
    expect(wideHighlighted.extra).toBe(wide.reports[0].extraEst.length);
    expect(wideHighlighted.matched).toBeGreaterThan(defaultHighlighted.matched);

    const legend = shadow(el).querySelector('.match-legend')!.textContent!;
    expect(legend).toContain(`matched ${wide.reports[0].pairs.length}`);
  });

  it('highlight mode off paints everything neutral', async () => {
    const el = await mount();
    expect(highlightedCounts(el).matched).toBeGreaterThan(0);
    el.setHighlightMode('off');
    const counts = highlightedCounts(el);
    expect(counts.matched + counts.missed + counts.extra).toBe(0);
  });
});

function highlightedCounts(el: WaveRollElement): { matched: number; missed: number; extra: number } {
  const counts = { matched: 0, missed: 0, extra: 0 };
  for (const op of el.drawList) {
    if (op.op === 'rect' && op.highlight !== 'neutral') counts[op.highlight] += 1;
  }
  return counts;
}

async function fetchDocument(onsetTol?: number) {
  const url =
    onsetTol === undefined
      ? `${baseUrl}/document.json`
      : `${baseUrl}/document.json?onset-tol=${onsetTol}`;
  const response = await fetch(url);
  expect(response.ok).toBe(true);
  return await response.json();
}
