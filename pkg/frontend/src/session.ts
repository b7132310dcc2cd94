/** Live labeling session for one (recording, user) pair.
 *
 * Edits apply optimistically to the local label set and queue as journal
 * events; a ticker flushes the queue within one autosave interval of the
 * first unflushed edit. Server rejection (overlap, stale sequence) rolls the
 * local set back to the last confirmed state, so rendered geometry always
 * derives from server-confirmed labels plus the optimistic pending set.
 */

import { ApiError, type ApiClient } from './api.js';
import { TileCache } from './tilecache.js';
import { trackForClass } from './tracks.js';
import type {
  ConfigDoc,
  JournalEventWire,
  LabelClass,
  LabelPayload,
  StftParams,
  Tile,
} from './types.js';

export const DEFAULT_STEP_MS = 5000;
export const DEFAULT_VIEW_MS = 15000;

function newId(): string {
  const c = (globalThis as any).crypto;
  if (c && typeof c.randomUUID === 'function') {
    return c.randomUUID().replace(/-/g, '');
  }
  let out = '';
  for (let i = 0; i < 32; i++) out += Math.floor(Math.random() * 16).toString(16);
  return out;
}

function sameLabels(a: LabelPayload[], b: LabelPayload[]): boolean {
  if (a.length !== b.length) return false;
  const key = (l: LabelPayload) => `${l.id}|${l.class}|${l.track}|${l.start_ms}|${l.end_ms}`;
  const as = a.map(key).sort();
  const bs = b.map(key).sort();
  return as.every((k, i) => k === bs[i]);
}

function intervalsOverlap(aStart: number, aEnd: number, bStart: number, bEnd: number): boolean {
  // Touching endpoints are allowed; only a positive-length intersection counts.
  return aStart < bEnd && bStart < aEnd;
}

export function validStftParams(p: StftParams): boolean {
  const powerOfTwo = p.window_size > 0 && (p.window_size & (p.window_size - 1)) === 0;
  return (
    powerOfTwo &&
    p.hop_size > 0 &&
    p.hop_size <= p.window_size &&
    p.floor_db < 0 &&
    (p.window_fn === 'hann' || p.window_fn === 'hamming' || p.window_fn === 'rect')
  );
}

export function classForHotkey(config: ConfigDoc, key: string): LabelClass | null {
  for (const [cls, style] of Object.entries(config.class_styles)) {
    if (style.hotkey === key) return cls as LabelClass;
  }
  return null;
}

export class Session {
  /** Local working set: server-confirmed labels plus optimistic edits. */
  labels: LabelPayload[] = [];
  /** Last state the server acknowledged. */
  private confirmed: LabelPayload[] = [];
  private pending: JournalEventWire[] = [];
  private nextSeq = 1;
  revision = 0;
  /** Set when a duplicate tab wins the sequence race; edits are refused. */
  readOnly = false;
  /** Inline message for the last rejected edit, null when clean. */
  violation: string | null = null;

  activeClass: LabelClass = 'inspiration';
  playbackMs = 0;
  viewT0 = 0;
  viewT1: number;
  stepMs = DEFAULT_STEP_MS;

  readonly tiles: TileCache;
  lastTile: Tile | null = null;

  private dirtySince: number | null = null;
  private flushing = false;

  constructor(
    private client: ApiClient,
    readonly recordingId: string,
    readonly user: string,
    readonly config: ConfigDoc,
    readonly durationMs: number,
    private now: () => number = () => Date.now(),
  ) {
    this.viewT1 = Math.min(DEFAULT_VIEW_MS, durationMs);
    this.tiles = new TileCache(client, { ...config.stft });
  }

  static async open(
    client: ApiClient,
    recordingId: string,
    user: string,
    config: ConfigDoc,
    durationMs: number,
    now?: () => number,
  ): Promise<Session> {
    const session = new Session(client, recordingId, user, config, durationMs, now);
    const doc = await client.labels(recordingId, user);
    session.confirmed = doc.labels.map((l) => ({ ...l }));
    session.labels = doc.labels.map((l) => ({ ...l }));
    session.revision = doc.revision;
    session.nextSeq = doc.last_seq + 1;
    return session;
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  get dirty(): boolean {
    return this.pending.length > 0;
  }

  // ---- editing ---------------------------------------------------------

  /** One drag on a track: snap to whole ms, echo locally, queue the event.
   * Overlap with an existing same-track label rejects the gesture and
   * restores the previous geometry. Returns the new label or null. */
  createLabelGesture(t0Sec: number, t1Sec: number, cls?: LabelClass): LabelPayload | null {
    if (this.readOnly) {
      this.violation = 'session is read-only (another tab owns this file)';
      return null;
    }
    const useClass = cls ?? this.activeClass;
    const startMs = Math.max(0, Math.round(Math.min(t0Sec, t1Sec) * 1000));
    const endMs = Math.min(this.durationMs, Math.round(Math.max(t0Sec, t1Sec) * 1000));
    if (endMs <= startMs) {
      this.violation = 'zero-length drag';
      return null;
    }
    const track = trackForClass(this.config.layout, useClass);
    const at = new Date(this.now()).toISOString();
    const label: LabelPayload = {
      id: newId(),
      class: useClass,
      track,
      start_ms: startMs,
      end_ms: endMs,
      annotator: this.user,
      created_at: at,
      updated_at: at,
    };

    // Optimistic echo, then the same non-overlap rule the server enforces.
    const before = this.labels;
    this.labels = [...this.labels, label];
    const clash = before.find(
      (l) => l.track === track && intervalsOverlap(startMs, endMs, l.start_ms, l.end_ms),
    );
    if (clash) {
      this.labels = before; // visual rollback
      this.violation = `overlaps ${clash.class} [${clash.start_ms}, ${clash.end_ms}) on track ${track}`;
      return null;
    }

    this.violation = null;
    this.queueEvent('add', label as unknown as Record<string, unknown>);
    return label;
  }

  resizeLabel(id: string, startMs: number, endMs: number): boolean {
    if (this.readOnly) return false;
    const idx = this.labels.findIndex((l) => l.id === id);
    if (idx < 0 || endMs <= startMs || startMs < 0 || endMs > this.durationMs) {
      this.violation = 'invalid resize';
      return false;
    }
    const target = this.labels[idx];
    const clash = this.labels.find(
      (l) =>
        l.id !== id &&
        l.track === target.track &&
        intervalsOverlap(startMs, endMs, l.start_ms, l.end_ms),
    );
    if (clash) {
      this.violation = `overlaps ${clash.class} [${clash.start_ms}, ${clash.end_ms})`;
      return false;
    }
    const updated: LabelPayload = {
      ...target,
      start_ms: startMs,
      end_ms: endMs,
      updated_at: new Date(this.now()).toISOString(),
    };
    this.labels = this.labels.map((l) => (l.id === id ? updated : l));
    this.violation = null;
    this.queueEvent('resize', updated as unknown as Record<string, unknown>);
    return true;
  }

  deleteLabel(id: string): boolean {
    if (this.readOnly) return false;
    if (!this.labels.some((l) => l.id === id)) return false;
    this.labels = this.labels.filter((l) => l.id !== id);
    this.violation = null;
    this.queueEvent('delete', { id });
    return true;
  }

  private queueEvent(op: JournalEventWire['op'], payload: Record<string, unknown>): void {
    this.pending.push({
      seq: this.nextSeq++,
      op,
      payload,
      at: new Date(this.now()).toISOString(),
    });
    if (this.dirtySince === null) this.dirtySince = this.now();
  }

  // ---- autosave --------------------------------------------------------

  /** Drive from a timer; flushes once the oldest unflushed edit is an
   * autosave interval old. Returns true when a flush ran. */
  async tick(): Promise<boolean> {
    if (this.dirtySince === null || this.flushing) return false;
    if (this.now() - this.dirtySince < this.config.autosave_interval_ms) return false;
    await this.flush();
    return true;
  }

  /** Push all pending events; on rejection roll back to confirmed state. */
  async flush(): Promise<void> {
    if (this.pending.length === 0 || this.flushing) return;
    this.flushing = true;
    const batch = this.pending;
    try {
      const result = await this.client.postEvents(this.recordingId, this.user, batch);
      if (result.appended < batch.length) {
        // The journal already held (some of) these sequence numbers. Either
        // this is our own retried batch, or a duplicate tab raced us with
        // colliding seqs. Only the server copy can tell the two apart.
        const doc = await this.client.labels(this.recordingId, this.user);
        if (!sameLabels(doc.labels, this.labels)) {
          this.readOnly = true;
          this.confirmed = doc.labels.map((l) => ({ ...l }));
          this.labels = doc.labels.map((l) => ({ ...l }));
          this.pending = [];
          this.dirtySince = null;
          this.revision = doc.revision;
          this.nextSeq = doc.last_seq + 1;
          this.violation = 'edits lost: another session owns this file';
          return;
        }
      }
      this.confirmed = this.labels.map((l) => ({ ...l }));
      this.pending = [];
      this.dirtySince = null;
      this.revision = result.revision;
      this.nextSeq = result.last_seq + 1;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Another tab advanced the journal: this one goes read-only.
        this.readOnly = true;
        this.rollbackPending();
        this.violation = 'edits lost: another session owns this file';
      } else if (err instanceof ApiError && err.status === 422) {
        this.rollbackPending();
        this.violation = `server rejected edits: ${JSON.stringify(err.detail ?? err.message)}`;
      } else {
        // transient (network): keep the queue, retry on the next tick
        this.flushing = false;
        throw err;
      }
    } finally {
      this.flushing = false;
    }
  }

  private rollbackPending(): void {
    this.labels = this.confirmed.map((l) => ({ ...l }));
    this.pending = [];
    this.dirtySince = null;
  }

  /** Re-read server state (used after conflicts or external edits). */
  async resync(): Promise<void> {
    const doc = await this.client.labels(this.recordingId, this.user);
    this.confirmed = doc.labels.map((l) => ({ ...l }));
    this.labels = doc.labels.map((l) => ({ ...l }));
    this.revision = doc.revision;
    this.nextSeq = doc.last_seq + 1;
    this.pending = [];
    this.dirtySince = null;
  }

  // ---- navigation ------------------------------------------------------

  navigate(direction: 'forward' | 'backward'): void {
    const span = this.viewT1 - this.viewT0;
    const delta = direction === 'forward' ? this.stepMs : -this.stepMs;
    let t0 = this.viewT0 + delta;
    t0 = Math.max(0, Math.min(t0, this.durationMs - span));
    this.viewT0 = t0;
    this.viewT1 = t0 + span;
  }

  seek(recordingStart = true): void {
    if (recordingStart) {
      this.viewT0 = 0;
      this.viewT1 = Math.min(DEFAULT_VIEW_MS, this.durationMs);
    }
  }

  // ---- spectrogram -----------------------------------------------------

  /** Apply new STFT controls. Invalid combinations are refused before any
   * request; a real change discards cached tiles so the visible range is
   * refetched with the new params. */
  setStft(params: StftParams): boolean {
    if (!validStftParams(params)) return false;
    this.tiles.setParams({ ...params });
    return true;
  }

  /** Fetch (or reuse) the tile covering the current view window. */
  async visibleTile(): Promise<Tile> {
    const tile = await this.tiles.get(this.recordingId, this.viewT0, this.viewT1);
    this.lastTile = tile;
    return tile;
  }

  /** [min, max] of the dB scale currently shown next to the spectrogram. */
  displayedDbRange(): [number, number] | null {
    return this.lastTile ? [this.lastTile.dbMin, this.lastTile.dbMax] : null;
  }
}
