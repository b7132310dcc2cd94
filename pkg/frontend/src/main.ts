/** Browser entry point: wires the DOM to the session state machine. */

import { HttpClient } from './api.js';
import { loadExemplars, storeSelection } from './goldpanel.js';
import { dbScaleText, drawLabels, drawLanes, drawTile } from './render.js';
import { Session, classForHotkey, validStftParams } from './session.js';
import { lanesHeight, xToMs } from './tracks.js';
import type { ConfigDoc, FileEntry, LabelClass, StftParams } from './types.js';
import { computePeaks, drawWaveform } from './waveform.js';

const client = new HttpClient('');

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

interface App {
  config: ConfigDoc;
  user: string;
  session: Session | null;
  files: FileEntry[];
  autosaveTimer: number | null;
}

async function boot(): Promise<void> {
  const config = await client.config();
  const app: App = { config, user: 'annotator', session: null, files: [], autosaveTimer: null };

  const userInput = el<HTMLInputElement>('user');
  userInput.value = app.user;
  userInput.addEventListener('change', () => {
    app.user = userInput.value.trim() || 'annotator';
    void refreshFiles(app);
  });

  wireStftControls(app);
  wireKeyboard(app);
  wireDrag(app);
  wireGoldPanel(app);

  el<HTMLButtonElement>('back').addEventListener('click', () => {
    app.session?.navigate('backward');
    void redraw(app);
  });
  el<HTMLButtonElement>('fwd').addEventListener('click', () => {
    app.session?.navigate('forward');
    void redraw(app);
  });
  el<HTMLButtonElement>('finalize').addEventListener('click', async () => {
    if (!app.session) return;
    await app.session.flush();
    await client.finalize(app.session.recordingId, app.user);
    await refreshFiles(app);
  });

  await refreshFiles(app);
}

async function refreshFiles(app: App): Promise<void> {
  app.files = await client.files(app.user);
  const list = el<HTMLUListElement>('files');
  list.innerHTML = '';
  for (const entry of app.files) {
    const li = document.createElement('li');
    li.textContent = `${entry.recording_id} (${(entry.duration_ms / 1000).toFixed(1)} s) — ${entry.status ?? ''}`;
    li.addEventListener('click', () => void openFile(app, entry));
    list.appendChild(li);
  }
}

async function openFile(app: App, entry: FileEntry): Promise<void> {
  if (app.autosaveTimer !== null) clearInterval(app.autosaveTimer);
  app.session = await Session.open(client, entry.recording_id, app.user, app.config, entry.duration_ms);
  el<HTMLAudioElement>('player').src = client.audioUrl(entry.recording_id);
  // flush check twice per interval so edits always land within one interval
  app.autosaveTimer = window.setInterval(() => {
    void app.session?.tick().then((flushed) => {
      if (flushed) void redraw(app);
    });
  }, Math.max(50, app.config.autosave_interval_ms / 2));
  await redraw(app);
}

async function redraw(app: App): Promise<void> {
  const s = app.session;
  if (!s) return;
  const spec = el<HTMLCanvasElement>('spectrogram');
  const wave = el<HTMLCanvasElement>('waveform');
  const lanes = el<HTMLCanvasElement>('lanes');
  lanes.height = lanesHeight(app.config.layout);

  const tile = await s.visibleTile();
  drawTile(spec.getContext('2d')!, tile, spec.width, spec.height);
  const scale = dbScaleText(tile);
  el<HTMLElement>('db-top').textContent = scale.top;
  el<HTMLElement>('db-bottom').textContent = scale.bottom;

  const audio = await fetch(client.audioUrl(s.recordingId)).then((r) => r.arrayBuffer());
  const decoded = await new AudioContext().decodeAudioData(audio.slice(0));
  const window = decoded.getChannelData(0).subarray(
    Math.floor((s.viewT0 / 1000) * decoded.sampleRate),
    Math.floor((s.viewT1 / 1000) * decoded.sampleRate),
  );
  drawWaveform(wave.getContext('2d')!, computePeaks(window, wave.width), wave.width, wave.height);

  const ctx = lanes.getContext('2d')!;
  ctx.clearRect(0, 0, lanes.width, lanes.height);
  drawLanes(ctx, app.config.layout, lanes.width);
  drawLabels(ctx, s.labels, app.config, s.viewT0, s.viewT1, lanes.width);

  el<HTMLElement>('status').textContent =
    s.violation ?? (s.readOnly ? 'read-only' : `rev ${s.revision}, active: ${s.activeClass}`);
}

function wireStftControls(app: App): void {
  const apply = el<HTMLButtonElement>('stft-apply');
  apply.addEventListener('click', () => {
    if (!app.session) return;
    const params: StftParams = {
      window_size: Number(el<HTMLInputElement>('stft-win').value),
      hop_size: Number(el<HTMLInputElement>('stft-hop').value),
      window_fn: el<HTMLSelectElement>('stft-fn').value,
      floor_db: Number(el<HTMLInputElement>('stft-floor').value),
    };
    if (!validStftParams(params)) {
      el<HTMLElement>('status').textContent = 'invalid STFT parameters';
      return;
    }
    app.session.setStft(params);
    void redraw(app);
  });
}

function wireKeyboard(app: App): void {
  document.addEventListener('keydown', (ev) => {
    if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLTextAreaElement) return;
    const s = app.session;
    if (!s) return;
    if (ev.key === 'ArrowLeft') {
      s.navigate('backward');
      void redraw(app);
    } else if (ev.key === 'ArrowRight') {
      s.navigate('forward');
      void redraw(app);
    } else {
      const cls = classForHotkey(app.config, ev.key);
      if (cls) {
        s.activeClass = cls;
        void redraw(app);
      }
    }
  });
}

function wireDrag(app: App): void {
  const lanes = el<HTMLCanvasElement>('lanes');
  let dragStartX: number | null = null;
  lanes.addEventListener('mousedown', (ev) => {
    dragStartX = ev.offsetX;
  });
  lanes.addEventListener('mouseup', (ev) => {
    const s = app.session;
    if (s === null || dragStartX === null) return;
    const t0 = xToMs(Math.min(dragStartX, ev.offsetX), s.viewT0, s.viewT1, lanes.width) / 1000;
    const t1 = xToMs(Math.max(dragStartX, ev.offsetX), s.viewT0, s.viewT1, lanes.width) / 1000;
    dragStartX = null;
    s.createLabelGesture(t0, t1);
    void redraw(app);
  });
}

function wireGoldPanel(app: App): void {
  el<HTMLButtonElement>('gold-load').addEventListener('click', async () => {
    const cls = el<HTMLSelectElement>('gold-class').value as LabelClass;
    const panel = await loadExemplars(client, cls);
    const list = el<HTMLUListElement>('gold-list');
    list.innerHTML = '';
    if (panel.placeholder) {
      const li = document.createElement('li');
      li.textContent = panel.placeholder;
      list.appendChild(li);
      return;
    }
    for (const clip of panel.clips) {
      const li = document.createElement('li');
      li.textContent = `${clip.recording_id} [${clip.start_ms}, ${clip.end_ms}) ${clip.note ?? ''}`;
      li.addEventListener('click', () => {
        el<HTMLAudioElement>('gold-player').src = client.goldAudioUrl(clip.clip_id);
        void el<HTMLAudioElement>('gold-player').play();
      });
      list.appendChild(li);
    }
  });
  el<HTMLButtonElement>('gold-store').addEventListener('click', async () => {
    const s = app.session;
    if (!s) return;
    const last = s.labels[s.labels.length - 1];
    if (!last) return;
    await storeSelection(client, s.recordingId, last.class, last.start_ms, last.end_ms, app.user);
  });
}

void boot();
