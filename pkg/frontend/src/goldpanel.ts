/** Reference-exemplar panel: browse and play stored gold-standard clips for
 * a class without leaving the labeling session. */

import type { ApiClient } from './api.js';
import type { GoldClip, LabelClass } from './types.js';

export interface GoldPanelState {
  cls: LabelClass;
  clips: GoldClip[];
  placeholder: string | null;
}

export async function loadExemplars(client: ApiClient, cls: LabelClass): Promise<GoldPanelState> {
  const clips = await client.goldClips(cls);
  return {
    cls,
    clips,
    placeholder: clips.length === 0 ? `no reference clips stored for ${cls}` : null,
  };
}

export async function storeSelection(
  client: ApiClient,
  recordingId: string,
  cls: LabelClass,
  startMs: number,
  endMs: number,
  user: string,
  note?: string,
): Promise<GoldClip> {
  return client.storeGoldClip({
    recording_id: recordingId,
    class: cls,
    start_ms: startMs,
    end_ms: endMs,
    user,
    note,
  });
}
