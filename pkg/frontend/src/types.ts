/** Wire contracts shared with the engine's serve endpoints. */

export interface ManifestEntry {
  path: string;
  name?: string;
  type: 'audio' | 'midi';
}

export interface NoteJson {
  pitch: number;
  onsetSec: number;
  offsetSec: number;
  velocity: number;
  channel: number;
  trackIndex: number;
}

export interface PedalJson {
  startSec: number;
  endSec: number;
  channel: number;
  trackIndex: number;
}

export interface LayerJson {
  id: string;
  name: string;
  kind: 'audio' | 'midi';
  color: [number, number, number, number];
  visible: boolean;
  sustainVisible: boolean;
  sourcePath: string;
}

export interface ToleranceJson {
  onsetTolSec: number;
  requireExactPitch: boolean;
  offsetEnabled: boolean;
  offsetRatio: number;
  offsetMinTolSec: number;
}

export interface MetricsJson {
  precision: number;
  recall: number;
  f1: number;
  matchedCount: number;
  refCount: number;
  estCount: number;
}

export interface ReportJson {
  refLayer: string;
  estLayer: string;
  tolerance: ToleranceJson;
  pairs: [number, number][];
  missedRef: number[];
  extraEst: number[];
  metrics: MetricsJson;
}

export interface ViewportJson {
  timeStart: number;
  timeEnd: number;
  pitchMin: number;
  pitchMax: number;
}

export interface DocumentJson {
  schemaVersion: number;
  manifest: { path: string; name: string; type: string }[];
  durationSec: number;
  viewport: ViewportJson;
  layers: LayerJson[];
  notes: Record<string, NoteJson[]>;
  pedal: Record<string, PedalJson[]>;
  reports: ReportJson[];
}

export interface PeakLevelJson {
  bucketSizeSamples: number;
  min: number[];
  max: number[];
}

export interface PeaksJson {
  schemaVersion: number;
  layerId: string;
  sampleRate: number;
  durationSec: number;
  levels: PeakLevelJson[];
}

export type HighlightKind = 'neutral' | 'matched' | 'missed' | 'extra';
export type HighlightMode = 'off' | 'matched' | 'differences' | 'full';

export interface ToleranceRequest {
  onsetTol?: number;
  offsets?: boolean;
  offsetRatio?: number;
  offsetMinTol?: number;
}
