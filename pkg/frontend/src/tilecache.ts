/** Spectrogram tile cache keyed by STFT params + time/frequency range.
 *
 * Changing any STFT control discards every cached tile, so the next render
 * refetches the visible range with the new params.
 */

import type { ApiClient } from './api.js';
import type { StftParams, Tile, TileRequest } from './types.js';

function paramsKey(p: StftParams): string {
  return `${p.window_size}/${p.hop_size}/${p.window_fn}/${p.floor_db}`;
}

function rangeKey(req: TileRequest): string {
  return `${req.t0_ms}-${req.t1_ms}:${req.f0_hz ?? ''}-${req.f1_hz ?? ''}`;
}

export class TileCache {
  private tiles = new Map<string, Tile>();
  private key: string;
  fetchCount = 0;

  constructor(
    private client: ApiClient,
    private params: StftParams,
  ) {
    this.key = paramsKey(params);
  }

  get stftParams(): StftParams {
    return this.params;
  }

  /** Swap STFT params; a real change empties the cache. */
  setParams(params: StftParams): boolean {
    const next = paramsKey(params);
    if (next === this.key) return false;
    this.params = params;
    this.key = next;
    this.tiles.clear();
    return true;
  }

  has(recordingId: string, t0Ms: number, t1Ms: number): boolean {
    return this.tiles.has(`${recordingId}|${this.key}|${t0Ms}-${t1Ms}:-`);
  }

  async get(recordingId: string, t0Ms: number, t1Ms: number,
            f0Hz?: number, f1Hz?: number): Promise<Tile> {
    const req: TileRequest = {
      win: this.params.window_size,
      hop: this.params.hop_size,
      window_fn: this.params.window_fn,
      floor_db: this.params.floor_db,
      t0_ms: t0Ms,
      t1_ms: t1Ms,
      f0_hz: f0Hz,
      f1_hz: f1Hz,
    };
    const mapKey = `${recordingId}|${this.key}|${rangeKey(req)}`;
    const hit = this.tiles.get(mapKey);
    if (hit) return hit;
    const tile = await this.client.tile(recordingId, req);
    this.fetchCount += 1;
    this.tiles.set(mapKey, tile);
    return tile;
  }

  clear(): void {
    this.tiles.clear();
  }
}
