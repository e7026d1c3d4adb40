import type { DocumentJson, PeaksJson, ToleranceRequest } from './types.js';

/**
 * Thin fetch wrapper over the engine's read-only endpoints. All matching
 * and timing math lives server-side; this only moves JSON and bytes.
 */
export class EngineClient {
  constructor(private readonly base: string = '') {}

  documentUrl(tolerance?: ToleranceRequest): string {
    const params = new URLSearchParams();
    if (tolerance) {
      if (tolerance.onsetTol !== undefined) params.set('onset-tol', String(tolerance.onsetTol));
      if (tolerance.offsets !== undefined) params.set('offsets', tolerance.offsets ? '1' : '0');
      if (tolerance.offsetRatio !== undefined) params.set('offset-ratio', String(tolerance.offsetRatio));
      if (tolerance.offsetMinTol !== undefined) params.set('offset-min-tol', String(tolerance.offsetMinTol));
    }
    const query = params.toString();
    return `${this.base}/document.json${query ? `?${query}` : ''}`;
  }

  async fetchDocument(tolerance?: ToleranceRequest): Promise<DocumentJson> {
    const response = await fetch(this.documentUrl(tolerance));
    if (!response.ok) {
      throw new Error(`document.json: HTTP ${response.status}`);
    }
    return (await response.json()) as DocumentJson;
  }

  async fetchPeaks(): Promise<PeaksJson | null> {
    const response = await fetch(`${this.base}/peaks.json`);
    if (response.status === 404) return null;
    if (!response.ok) {
      throw new Error(`peaks.json: HTTP ${response.status}`);
    }
    return (await response.json()) as PeaksJson;
  }

  fileUrl(path: string): string {
    return `${this.base}/files/${encodeURIComponent(path).replace(/%2F/gi, '/')}`;
  }

  async fetchFile(path: string): Promise<ArrayBuffer> {
    const response = await fetch(this.fileUrl(path));
    if (!response.ok) {
      throw new Error(`${path}: HTTP ${response.status}`);
    }
    return await response.arrayBuffer();
  }
}
