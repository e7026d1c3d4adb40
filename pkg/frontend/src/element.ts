import { EngineClient } from './client.js';
import { computeDrawList, rgbaToHex, type DrawOp, type LayerView, type RollView } from './drawlist.js';
import { paint } from './painter.js';
import { AudioLanePlayback, Scheduler, SimpleSynth, type MixState, type NoteWindowEvent } from './synth.js';
import { Transport } from './transport.js';
import type {
  DocumentJson,
  HighlightKind,
  HighlightMode,
  ManifestEntry,
  PeaksJson,
  ReportJson,
} from './types.js';

const STYLE = `
:host { display: block; font: 13px/1.4 system-ui, sans-serif; color: #222; }
.panel { display: flex; flex-direction: column; gap: 6px; padding: 8px; border: 1px solid #ddd; border-radius: 6px 6px 0 0; background: #fafafa; }
.controls { display: flex; flex-wrap: wrap; gap: 10px; align-items: center; }
.controls button { padding: 2px 10px; }
.controls label { display: inline-flex; gap: 4px; align-items: center; }
.controls input[type=number] { width: 5em; }
.tracks { display: flex; flex-direction: column; gap: 2px; }
.track-row { display: flex; gap: 8px; align-items: center; padding: 2px 4px; border-radius: 4px; }
.track-row:hover { background: #f0f0f0; }
.track-row .swatch { width: 12px; height: 12px; border-radius: 3px; display: inline-block; }
.track-row .track-name { min-width: 10em; }
.track-row .kind-badge { font-size: 11px; color: #777; border: 1px solid #ccc; border-radius: 3px; padding: 0 4px; }
.track-row .error-badge { color: #b00020; font-weight: 600; }
.track-row input[type=range] { width: 80px; }
.notice { color: #8a6d00; }
.empty-state { color: #777; font-style: italic; padding: 8px; }
.match-legend { color: #555; }
canvas.roll { display: block; border: 1px solid #ddd; border-top: none; border-radius: 0 0 6px 6px; }
`;

interface EntryRow {
  entry: ManifestEntry;
  layerId: string | null;
  error: string | null;
}

/**
 * <wave-roll files='[{"path": "gt.mid", "name": "Ground Truth", "type": "midi"}, ...]'>
 *
 * Layered piano-roll viewer with synchronized playback. All note data,
 * matching, and tolerances come from the engine's serve endpoints
 * (document.json / peaks.json / files); the element draws, schedules, and
 * forwards user intent. Set the `base` attribute when the serving engine
 * lives at a different origin than the page.
 */
export class WaveRollElement extends HTMLElement {
  static observedAttributes = ['files', 'base'];

  /** Resolves when the current load attempt has settled (even on errors). */
  ready: Promise<void> = Promise.resolve();

  readonly transport = new Transport();

  private client = new EngineClient('');
  private doc: DocumentJson | null = null;
  private peaks: PeaksJson | null = null;
  private rows: EntryRow[] = [];
  private layerViews: LayerView[] = [];
  private mixes = new Map<string, MixState>();
  private highlightMode: HighlightMode = 'full';
  private onsetTolerance: number | null = null; // null == engine default
  private activeReport: ReportJson | null = null;
  private highlights: Record<string, HighlightKind[]> = {};
  private lastDrawOps: DrawOp[] = [];

  private canvas!: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D | null = null;
  private tracksBox!: HTMLElement;
  private noticeBox!: HTMLElement;
  private legendBox!: HTMLElement;
  private timeBox!: HTMLElement;

  private audioCtx: AudioContext | null = null;
  private synth: SimpleSynth | null = null;
  private scheduler: Scheduler | null = null;
  private lane: AudioLanePlayback | null = null;
  private rafHandle: number | null = null;
  private connectedOnce = false;

  connectedCallback(): void {
    if (!this.shadowRoot) this.buildSkeleton();
    this.connectedOnce = true;
    this.load();
  }

  disconnectedCallback(): void {
    this.stopRenderLoop();
    this.scheduler?.stop();
    this.lane?.dispose();
  }

  attributeChangedCallback(): void {
    if (this.connectedOnce) this.load();
  }

  // --- public surface (also used by tests) --------------------------------

  get drawList(): DrawOp[] {
    return this.lastDrawOps;
  }

  get highlightCounts(): { matched: number; missed: number; extra: number } {
    const report = this.activeReport;
    if (!report) return { matched: 0, missed: 0, extra: 0 };
    return {
      matched: report.pairs.length,
      missed: report.missedRef.length,
      extra: report.extraEst.length,
    };
  }

  /** Re-run matching in the engine at a new onset tolerance (seconds). */
  setTolerance(onsetTolSec: number): Promise<void> {
    this.onsetTolerance = onsetTolSec;
    const input = this.shadowRoot?.querySelector<HTMLInputElement>('.tolerance');
    if (input) input.value = String(onsetTolSec);
    const refresh = this.refetchReports();
    this.ready = refresh;
    return refresh;
  }

  setHighlightMode(mode: HighlightMode): void {
    this.highlightMode = mode;
    this.computeHighlights();
    this.refresh();
  }

  setLayerVisibility(layerId: string, visible: boolean): void {
    const view = this.layerViews.find((layer) => layer.id === layerId);
    if (!view) throw new Error(`unknown layer id: ${layerId}`);
    view.visible = visible;
    const box = this.tracksBox.querySelector<HTMLInputElement>(
      `.track-row[data-layer="${layerId}"] .track-visible`,
    );
    if (box) box.checked = visible;
    this.refresh();
  }

  setLoop(aSec: number, bSec: number): void {
    this.transport.setLoop(aSec, bSec);
    this.scheduler?.resync();
    this.lane?.sync();
    this.refresh();
  }

  clearLoop(): void {
    this.transport.clearLoop();
    this.scheduler?.resync();
    this.lane?.sync();
    this.refresh();
  }

  play(): void {
    this.transport.play();
    this.audioCtx?.resume?.();
    this.scheduler?.start();
    this.lane?.sync();
    this.startRenderLoop();
    this.refresh();
  }

  pause(): void {
    this.transport.pause();
    this.scheduler?.stop();
    this.lane?.sync();
    this.stopRenderLoop();
    this.refresh();
  }

  stopPlayback(): void {
    this.transport.stop();
    this.scheduler?.stop();
    this.lane?.sync();
    this.stopRenderLoop();
    this.refresh();
  }

  seek(mediaSec: number): void {
    this.transport.seek(mediaSec);
    this.scheduler?.resync();
    this.lane?.sync();
    this.refresh();
  }

  /** Recompute the draw list (and repaint when a 2D context exists). */
  refresh(): DrawOp[] {
    this.transport.tick();
    if (this.transport.state !== 'playing') this.stopRenderLoop();
    const width = this.canvas.width;
    const height = this.canvas.height;
    const view: RollView = {
      layers: this.layerViews,
      notes: this.doc?.notes ?? {},
      pedal: this.doc?.pedal ?? {},
      viewport: this.doc?.viewport ?? { timeStart: 0, timeEnd: 1, pitchMin: 21, pitchMax: 108 },
      peaks: this.peaks,
      highlights: this.highlights,
      playheadSec: this.transport.currentTime(),
      loop: this.transport.loop,
    };
    this.lastDrawOps = computeDrawList(view, width, height);
    if (this.ctx) paint(this.ctx, this.lastDrawOps, width, height);
    this.timeBox.textContent = `${this.transport.currentTime().toFixed(2)} s`;
    return this.lastDrawOps;
  }

  // --- loading -------------------------------------------------------------

  private load(): void {
    this.ready = this.doLoad().catch((error: unknown) => {
      this.showNotice(`failed to load: ${String(error)}`);
      this.tracksBox.replaceChildren();
      for (const entry of this.parseEntriesSafe()) {
        this.tracksBox.appendChild(this.buildErrorRow(entry, 'load failed'));
      }
    });
  }

  private parseEntriesSafe(): ManifestEntry[] {
    try {
      const parsed = JSON.parse(this.getAttribute('files') ?? '[]');
      return Array.isArray(parsed) ? (parsed as ManifestEntry[]) : [];
    } catch {
      return [];
    }
  }

  private async doLoad(): Promise<void> {
    this.stopPlayback();
    this.doc = null;
    this.peaks = null;
    this.activeReport = null;
    this.highlights = {};
    this.layerViews = [];
    this.mixes.clear();
    this.noticeBox.textContent = '';
    this.tracksBox.replaceChildren();

    const filesAttr = this.getAttribute('files');
    let entries: ManifestEntry[];
    try {
      const parsed = JSON.parse(filesAttr ?? '[]');
      if (!Array.isArray(parsed)) throw new Error('files attribute must be a JSON array');
      entries = parsed as ManifestEntry[];
    } catch (error) {
      this.showNotice(`bad files attribute: ${String(error)}`);
      return;
    }

    this.client = new EngineClient(this.getAttribute('base') ?? '');

    if (entries.length === 0) {
      const empty = document.createElement('div');
      empty.className = 'empty-state';
      empty.textContent = 'No files to display. Provide a JSON array in the files attribute.';
      this.tracksBox.appendChild(empty);
      this.refresh();
      return;
    }

    const doc = await this.client.fetchDocument(this.toleranceRequest());
    this.doc = doc;
    this.transport.duration = doc.durationSec;

    const layerByPath = new Map(doc.layers.map((layer) => [layer.sourcePath, layer]));
    this.rows = entries.map((entry) => {
      const layer = entry?.path ? layerByPath.get(entry.path) : undefined;
      if (!layer) {
        return { entry, layerId: null, error: 'not available from the engine' };
      }
      this.layerViews.push({
        id: layer.id,
        kind: layer.kind,
        colorHex: rgbaToHex(layer.color),
        alpha: layer.color[3] / 255,
        visible: layer.visible,
        sustainVisible: layer.sustainVisible,
      });
      this.mixes.set(layer.id, { mute: false, pan: 0, gain: 1 });
      return { entry, layerId: layer.id, error: null };
    });

    for (const row of this.rows) {
      this.tracksBox.appendChild(
        row.layerId
          ? this.buildTrackRow(row.entry, row.layerId)
          : this.buildErrorRow(row.entry, row.error ?? 'failed'),
      );
    }

    if (this.rows.some((row) => row.entry?.type === 'audio' && row.layerId)) {
      try {
        this.peaks = await this.client.fetchPeaks();
      } catch {
        this.peaks = null;
      }
    }

    this.computeHighlights();
    await this.setupAudio();
    this.refresh();
  }

  private toleranceRequest() {
    return this.onsetTolerance === null ? undefined : { onsetTol: this.onsetTolerance };
  }

  private async refetchReports(): Promise<void> {
    if (!this.doc) return;
    const doc = await this.client.fetchDocument(this.toleranceRequest());
    this.doc = doc;
    this.computeHighlights();
    this.refresh();
  }

  /**
   * Project the engine's diff report onto per-note highlight classes for
   * the current mode. No pairing decisions are made here.
   */
  private computeHighlights(): void {
    this.highlights = {};
    this.activeReport = this.doc?.reports?.[0] ?? null;
    const report = this.activeReport;
    this.legendBox.textContent = report
      ? `matched ${report.pairs.length} · missed ${report.missedRef.length} · extra ${report.extraEst.length}`
      : '';
    if (!report || !this.doc) return;

    const refClasses: HighlightKind[] = (this.doc.notes[report.refLayer] ?? []).map(() => 'neutral');
    const estClasses: HighlightKind[] = (this.doc.notes[report.estLayer] ?? []).map(() => 'neutral');
    if (this.highlightMode === 'matched' || this.highlightMode === 'full') {
      for (const [refIndex, estIndex] of report.pairs) {
        refClasses[refIndex] = 'matched';
        estClasses[estIndex] = 'matched';
      }
    }
    if (this.highlightMode === 'differences' || this.highlightMode === 'full') {
      for (const refIndex of report.missedRef) refClasses[refIndex] = 'missed';
      for (const estIndex of report.extraEst) estClasses[estIndex] = 'extra';
    }
    if (this.highlightMode !== 'off') {
      this.highlights[report.refLayer] = refClasses;
      this.highlights[report.estLayer] = estClasses;
    }
  }

  private async setupAudio(): Promise<void> {
    const AudioContextCtor =
      (globalThis as { AudioContext?: typeof AudioContext }).AudioContext ??
      (globalThis as { webkitAudioContext?: typeof AudioContext }).webkitAudioContext;
    if (!AudioContextCtor) {
      this.showNotice('Audio output unavailable in this browser: visual-only mode.');
      return;
    }
    if (!this.audioCtx) {
      this.audioCtx = new AudioContextCtor();
      this.synth = new SimpleSynth(this.audioCtx);
      this.scheduler = new Scheduler(
        this.audioCtx,
        this.synth,
        this.transport,
        (t0, t1) => this.eventsInWindow(t0, t1),
      );
    }
    const audioRow = this.rows.find((row) => row.entry?.type === 'audio' && row.layerId);
    if (audioRow && this.audioCtx) {
      try {
        const bytes = await this.client.fetchFile(audioRow.entry.path);
        const buffer = await this.audioCtx.decodeAudioData(bytes.slice(0));
        this.lane?.dispose();
        this.lane = new AudioLanePlayback(this.audioCtx, buffer, this.transport);
      } catch {
        const row = this.tracksBox.querySelector(`.track-row[data-layer="${audioRow.layerId}"]`);
        if (row) {
          const badge = document.createElement('span');
          badge.className = 'error-badge';
          badge.textContent = 'audio decode failed';
          row.appendChild(badge);
        }
      }
    }
  }

  /**
   * Note on/off events of visible, unmuted MIDI layers in [t0, t1),
   * sorted by time then track order, offs before ons at equal times --
   * the same window semantics the engine's scheduler queries use.
   */
  private eventsInWindow(t0: number, t1: number): NoteWindowEvent[] {
    const events: { key: [number, number, number, number]; event: NoteWindowEvent }[] = [];
    this.layerViews.forEach((layer, layerIndex) => {
      if (layer.kind !== 'midi' || !layer.visible) return;
      const mix = this.mixes.get(layer.id) ?? { mute: false, pan: 0, gain: 1 };
      if (mix.mute) return;
      (this.doc?.notes[layer.id] ?? []).forEach((note) => {
        if (note.onsetSec >= t0 && note.onsetSec < t1) {
          events.push({
            key: [note.onsetSec, layerIndex, 1, note.pitch],
            event: {
              atSec: note.onsetSec, kind: 'note_on', layerId: layer.id,
              pitch: note.pitch, velocity: note.velocity, pan: mix.pan, gain: mix.gain,
            },
          });
        }
        if (note.offsetSec >= t0 && note.offsetSec < t1) {
          events.push({
            key: [note.offsetSec, layerIndex, 0, note.pitch],
            event: {
              atSec: note.offsetSec, kind: 'note_off', layerId: layer.id,
              pitch: note.pitch, velocity: 0, pan: mix.pan, gain: mix.gain,
            },
          });
        }
      });
    });
    events.sort((lhs, rhs) => {
      for (let i = 0; i < 4; i++) {
        if (lhs.key[i] !== rhs.key[i]) return lhs.key[i] - rhs.key[i];
      }
      return 0;
    });
    return events.map((item) => item.event);
  }

  // --- DOM -----------------------------------------------------------------

  private buildSkeleton(): void {
    const root = this.attachShadow({ mode: 'open' });
    const style = document.createElement('style');
    style.textContent = STYLE;
    root.appendChild(style);

    const panel = document.createElement('div');
    panel.className = 'panel';

    const controls = document.createElement('div');
    controls.className = 'controls';
    controls.appendChild(this.button('btn-play', 'Play', () => this.play()));
    controls.appendChild(this.button('btn-pause', 'Pause', () => this.pause()));
    controls.appendChild(this.button('btn-stop', 'Stop', () => this.stopPlayback()));

    this.timeBox = document.createElement('span');
    this.timeBox.className = 'time-readout';
    this.timeBox.textContent = '0.00 s';
    controls.appendChild(this.timeBox);

    const loopLabel = document.createElement('label');
    loopLabel.append('Loop');
    const loopA = this.numberInput('loop-a', 0);
    const loopB = this.numberInput('loop-b', 0);
    loopLabel.appendChild(loopA);
    loopLabel.appendChild(loopB);
    loopLabel.appendChild(
      this.button('btn-loop-set', 'Set', () => {
        try {
          this.setLoop(Number(loopA.value), Number(loopB.value));
          this.noticeBox.textContent = '';
        } catch (error) {
          this.showNotice(String(error));
        }
      }),
    );
    loopLabel.appendChild(this.button('btn-loop-clear', 'Clear', () => this.clearLoop()));
    controls.appendChild(loopLabel);

    const tolLabel = document.createElement('label');
    tolLabel.append('Onset tol (s)');
    const tolInput = this.numberInput('tolerance', 0.05, 0.01);
    tolInput.addEventListener('change', () => {
      const value = Number(tolInput.value);
      if (Number.isFinite(value) && value > 0) void this.setTolerance(value);
    });
    tolLabel.appendChild(tolInput);
    controls.appendChild(tolLabel);

    const modeSelect = document.createElement('select');
    modeSelect.className = 'highlight-mode';
    for (const mode of ['off', 'matched', 'differences', 'full'] as const) {
      const option = document.createElement('option');
      option.value = mode;
      option.textContent = `highlight: ${mode}`;
      if (mode === this.highlightMode) option.selected = true;
      modeSelect.appendChild(option);
    }
    modeSelect.addEventListener('change', () =>
      this.setHighlightMode(modeSelect.value as HighlightMode),
    );
    controls.appendChild(modeSelect);

    this.legendBox = document.createElement('span');
    this.legendBox.className = 'match-legend';
    controls.appendChild(this.legendBox);

    panel.appendChild(controls);

    this.noticeBox = document.createElement('div');
    this.noticeBox.className = 'notice';
    panel.appendChild(this.noticeBox);

    this.tracksBox = document.createElement('div');
    this.tracksBox.className = 'tracks';
    panel.appendChild(this.tracksBox);

    root.appendChild(panel);

    this.canvas = document.createElement('canvas');
    this.canvas.className = 'roll';
    this.canvas.width = Number(this.getAttribute('width') ?? 960);
    this.canvas.height = Number(this.getAttribute('height') ?? 420);
    this.canvas.addEventListener('click', (event: MouseEvent) => {
      const rect = this.canvas.getBoundingClientRect();
      const width = rect.width || this.canvas.width;
      if (width > 0) this.seekFraction((event.clientX - rect.left) / width);
    });
    root.appendChild(this.canvas);
    this.ctx = this.canvas.getContext('2d');
  }

  seekFraction(fraction: number): void {
    const vp = this.doc?.viewport;
    const start = vp?.timeStart ?? 0;
    const end = vp?.timeEnd ?? this.transport.duration;
    this.seek(start + Math.min(Math.max(fraction, 0), 1) * (end - start));
  }

  private button(className: string, label: string, onClick: () => void): HTMLButtonElement {
    const button = document.createElement('button');
    button.className = className;
    button.textContent = label;
    button.addEventListener('click', onClick);
    return button;
  }

  private numberInput(className: string, value: number, step = 0.1): HTMLInputElement {
    const input = document.createElement('input');
    input.type = 'number';
    input.className = className;
    input.step = String(step);
    input.value = String(value);
    return input;
  }

  private buildTrackRow(entry: ManifestEntry, layerId: string): HTMLElement {
    const view = this.layerViews.find((layer) => layer.id === layerId)!;
    const row = document.createElement('div');
    row.className = 'track-row';
    row.dataset.layer = layerId;

    const swatch = document.createElement('span');
    swatch.className = 'swatch';
    swatch.style.background = view.colorHex;
    row.appendChild(swatch);

    const name = document.createElement('span');
    name.className = 'track-name';
    name.textContent = entry.name ?? entry.path;
    row.appendChild(name);

    const badge = document.createElement('span');
    badge.className = 'kind-badge';
    badge.textContent = view.kind;
    row.appendChild(badge);

    const visible = document.createElement('input');
    visible.type = 'checkbox';
    visible.className = 'track-visible';
    visible.checked = view.visible;
    visible.title = 'visible';
    visible.addEventListener('change', () => {
      view.visible = visible.checked;
      this.refresh();
    });
    row.appendChild(visible);

    const color = document.createElement('input');
    color.type = 'color';
    color.className = 'track-color';
    color.value = view.colorHex.toLowerCase();
    color.addEventListener('change', () => {
      view.colorHex = color.value.toUpperCase();
      swatch.style.background = view.colorHex;
      this.refresh();
    });
    row.appendChild(color);

    if (view.kind === 'midi') {
      const sustain = document.createElement('input');
      sustain.type = 'checkbox';
      sustain.className = 'track-sustain';
      sustain.checked = view.sustainVisible;
      sustain.title = 'sustain lane';
      sustain.addEventListener('change', () => {
        view.sustainVisible = sustain.checked;
        this.refresh();
      });
      row.appendChild(sustain);
    }

    const mute = document.createElement('input');
    mute.type = 'checkbox';
    mute.className = 'track-mute';
    mute.title = 'mute';
    mute.addEventListener('change', () => {
      const mix = this.mixes.get(layerId);
      if (mix) mix.mute = mute.checked;
      this.lane?.setMix(this.mixes.get(layerId) ?? { mute: false, pan: 0, gain: 1 });
      this.scheduler?.resync();
    });
    row.appendChild(mute);

    const pan = document.createElement('input');
    pan.type = 'range';
    pan.className = 'track-pan';
    pan.min = '-1';
    pan.max = '1';
    pan.step = '0.1';
    pan.value = '0';
    pan.title = 'pan';
    pan.addEventListener('input', () => {
      const mix = this.mixes.get(layerId);
      if (mix) mix.pan = Number(pan.value);
      if (view.kind === 'audio') {
        this.lane?.setMix(this.mixes.get(layerId) ?? { mute: false, pan: 0, gain: 1 });
      }
    });
    row.appendChild(pan);

    return row;
  }

  private buildErrorRow(entry: ManifestEntry | undefined, reason: string): HTMLElement {
    const row = document.createElement('div');
    row.className = 'track-row error';
    row.dataset.path = entry?.path ?? '';
    const name = document.createElement('span');
    name.className = 'track-name';
    name.textContent = entry?.name ?? entry?.path ?? '(invalid entry)';
    row.appendChild(name);
    const badge = document.createElement('span');
    badge.className = 'error-badge';
    badge.textContent = reason;
    row.appendChild(badge);
    return row;
  }

  private showNotice(message: string): void {
    this.noticeBox.textContent = message;
  }

  private startRenderLoop(): void {
    if (this.rafHandle !== null) return;
    const raf: (cb: () => void) => number =
      typeof requestAnimationFrame === 'function'
        ? (cb) => requestAnimationFrame(cb)
        : (cb) => setTimeout(cb, 16) as unknown as number;
    const step = () => {
      if (this.transport.state !== 'playing') {
        this.rafHandle = null;
        return;
      }
      this.refresh();
      this.rafHandle = raf(step);
    };
    this.rafHandle = raf(step);
  }

  private stopRenderLoop(): void {
    if (this.rafHandle !== null && typeof cancelAnimationFrame === 'function') {
      cancelAnimationFrame(this.rafHandle);
    }
    this.rafHandle = null;
  }
}
