/** Wire-level types mirrored from the annotation service's JSON API. */

export type LabelClass =
  | 'normal'
  | 'inspiration'
  | 'expiration'
  | 'wheeze'
  | 'stridor'
  | 'rhonchus'
  | 'discontinuous'
  | 'nbc'
  | 'continuous'
  | 'noise';

export interface LabelPayload {
  id: string;
  class: LabelClass;
  track: number;
  start_ms: number;
  end_ms: number;
  annotator: string;
  created_at: string;
  updated_at: string;
}

export interface JournalEventWire {
  seq: number;
  op: 'add' | 'resize' | 'delete';
  payload: Record<string, unknown>;
  at: string;
}

export interface LabelsDoc {
  version: number;
  recording_id: string;
  annotator: string;
  revision: number;
  last_seq: number;
  labels: LabelPayload[];
}

export interface EventsResult {
  last_seq: number;
  appended: number;
  revision: number;
}

export interface TrackDef {
  track: number;
  name: string;
  classes: LabelClass[];
}

export interface ClassStyle {
  hotkey: string;
  color: string;
}

export interface StftParams {
  window_size: number;
  hop_size: number;
  window_fn: string;
  floor_db: number;
}

export interface ConfigDoc {
  stft: StftParams;
  layout: TrackDef[];
  class_styles: Record<string, ClassStyle>;
  autosave_interval_ms: number;
  segment_length_ms: number;
}

export interface FileEntry {
  recording_id: string;
  duration_ms: number;
  sample_rate: number;
  status?: 'unlabeled' | 'in_progress' | 'finalized';
  label_counts?: Record<string, number>;
  revision?: number;
}

export interface TileRequest {
  win: number;
  hop: number;
  window_fn: string;
  floor_db: number;
  t0_ms: number;
  t1_ms: number;
  f0_hz?: number;
  f1_hz?: number;
}

/** A fetched spectrogram tile: raw PGM bytes plus the numeric headers. */
export interface Tile {
  body: Uint8Array;
  bins: number;
  frames: number;
  dbMin: number;
  dbMax: number;
  hopMs: number;
}

export interface GoldClip {
  clip_id: string;
  recording_id: string;
  class: string;
  start_ms: number;
  end_ms: number;
  note?: string;
  user?: string;
}
