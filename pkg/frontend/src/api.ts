/** Typed client for the annotation service's HTTP API.
 *
 * Everything downstream (session, tile cache, gold panel) talks to the
 * `ApiClient` interface so tests can substitute an in-memory server.
 */

import type {
  ConfigDoc,
  EventsResult,
  FileEntry,
  GoldClip,
  JournalEventWire,
  LabelPayload,
  LabelsDoc,
  Tile,
  TileRequest,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public detail?: unknown,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface ApiClient {
  config(): Promise<ConfigDoc>;
  files(user?: string): Promise<FileEntry[]>;
  labels(recordingId: string, user: string): Promise<LabelsDoc>;
  putLabels(
    recordingId: string,
    user: string,
    baseRevision: number,
    labels: LabelPayload[],
  ): Promise<LabelsDoc>;
  postEvents(
    recordingId: string,
    user: string,
    events: JournalEventWire[],
  ): Promise<EventsResult>;
  finalize(recordingId: string, user: string): Promise<void>;
  tile(recordingId: string, req: TileRequest): Promise<Tile>;
  goldClips(cls: string): Promise<GoldClip[]>;
  storeGoldClip(clip: Omit<GoldClip, 'clip_id'>): Promise<GoldClip>;
  audioUrl(recordingId: string): string;
  goldAudioUrl(clipId: string): string;
}

async function jsonOrThrow(resp: Response): Promise<any> {
  if (!resp.ok) {
    let detail: unknown;
    try {
      detail = await resp.json();
    } catch {
      detail = undefined;
    }
    throw new ApiError(resp.status, `${resp.status} ${resp.statusText}`, detail);
  }
  return resp.json();
}

function numberHeader(resp: Response, name: string): number {
  const raw = resp.headers.get(name);
  if (raw === null) throw new ApiError(500, `missing ${name} header`);
  return Number(raw);
}

export class HttpClient implements ApiClient {
  constructor(private base: string = '') {}

  private url(path: string, query?: Record<string, string | number | undefined>): string {
    const q = Object.entries(query ?? {})
      .filter(([, v]) => v !== undefined)
      .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
      .join('&');
    return this.base + path + (q ? `?${q}` : '');
  }

  async config(): Promise<ConfigDoc> {
    return jsonOrThrow(await fetch(this.url('/api/config')));
  }

  async files(user?: string): Promise<FileEntry[]> {
    return jsonOrThrow(await fetch(this.url('/api/files', { user })));
  }

  async labels(recordingId: string, user: string): Promise<LabelsDoc> {
    return jsonOrThrow(
      await fetch(this.url(`/api/files/${recordingId}/labels`, { user })),
    );
  }

  async putLabels(
    recordingId: string,
    user: string,
    baseRevision: number,
    labels: LabelPayload[],
  ): Promise<LabelsDoc> {
    const resp = await fetch(this.url(`/api/files/${recordingId}/labels`, { user }), {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ base_revision: baseRevision, labels }),
    });
    return jsonOrThrow(resp);
  }

  async postEvents(
    recordingId: string,
    user: string,
    events: JournalEventWire[],
  ): Promise<EventsResult> {
    const resp = await fetch(
      this.url(`/api/files/${recordingId}/labels/events`, { user }),
      {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ events }),
      },
    );
    return jsonOrThrow(resp);
  }

  async finalize(recordingId: string, user: string): Promise<void> {
    const resp = await fetch(
      this.url(`/api/files/${recordingId}/labels/finalize`, { user }),
      { method: 'POST' },
    );
    await jsonOrThrow(resp);
  }

  async tile(recordingId: string, req: TileRequest): Promise<Tile> {
    const resp = await fetch(
      this.url(`/api/files/${recordingId}/spectrogram`, {
        win: req.win,
        hop: req.hop,
        window_fn: req.window_fn,
        floor_db: req.floor_db,
        t0: req.t0_ms,
        t1: req.t1_ms,
        f0: req.f0_hz,
        f1: req.f1_hz,
      }),
    );
    if (!resp.ok) {
      throw new ApiError(resp.status, `tile fetch failed: ${resp.status}`);
    }
    return {
      body: new Uint8Array(await resp.arrayBuffer()),
      bins: numberHeader(resp, 'x-bins'),
      frames: numberHeader(resp, 'x-frames'),
      dbMin: numberHeader(resp, 'x-db-min'),
      dbMax: numberHeader(resp, 'x-db-max'),
      hopMs: numberHeader(resp, 'x-hop-ms'),
    };
  }

  async goldClips(cls: string): Promise<GoldClip[]> {
    return jsonOrThrow(await fetch(this.url('/api/goldstandard', { class: cls })));
  }

  async storeGoldClip(clip: Omit<GoldClip, 'clip_id'>): Promise<GoldClip> {
    const resp = await fetch(this.url('/api/goldstandard'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(clip),
    });
    return jsonOrThrow(resp);
  }

  audioUrl(recordingId: string): string {
    return this.url(`/api/files/${recordingId}/audio`);
  }

  goldAudioUrl(clipId: string): string {
    return this.url(`/api/goldstandard/${clipId}/audio`);
  }
}
