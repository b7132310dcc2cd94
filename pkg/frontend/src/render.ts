/** Canvas rendering for the spectrogram tile and the label lanes. */

import { decodePgm } from './pgm.js';
import { LANE_HEIGHT, labelRect, laneTop } from './tracks.js';
import type { ConfigDoc, LabelPayload, Tile, TrackDef } from './types.js';

/** Blit a PGM tile, stretching to the canvas size. Rows arrive top-down
 * with the highest frequency first. */
export function drawTile(ctx: CanvasRenderingContext2D, tile: Tile, width: number, height: number): void {
  const gm = decodePgm(tile.body);
  const img = ctx.createImageData(gm.width, gm.height);
  for (let i = 0; i < gm.pixels.length; i++) {
    const g = gm.pixels[i];
    img.data[4 * i] = g;
    img.data[4 * i + 1] = g;
    img.data[4 * i + 2] = g;
    img.data[4 * i + 3] = 255;
  }
  const off = new OffscreenCanvas(gm.width, gm.height);
  const offCtx = off.getContext('2d')!;
  offCtx.putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, width, height);
  ctx.drawImage(off, 0, 0, width, height);
}

/** Text for the dB scale endpoints beside the spectrogram. */
export function dbScaleText(tile: Tile): { top: string; bottom: string } {
  return { top: `${tile.dbMax} dB`, bottom: `${tile.dbMin} dB` };
}

export function drawLanes(
  ctx: CanvasRenderingContext2D,
  layout: TrackDef[],
  width: number,
): void {
  ctx.font = '11px sans-serif';
  for (const t of layout) {
    const y = laneTop(t.track);
    ctx.fillStyle = t.track % 2 === 0 ? '#10151c' : '#141b24';
    ctx.fillRect(0, y, width, LANE_HEIGHT);
    ctx.fillStyle = '#8aa0b8';
    ctx.fillText(t.name, 4, y + 12);
  }
}

export function drawLabels(
  ctx: CanvasRenderingContext2D,
  labels: LabelPayload[],
  config: ConfigDoc,
  t0Ms: number,
  t1Ms: number,
  width: number,
): void {
  for (const label of labels) {
    if (label.end_ms <= t0Ms || label.start_ms >= t1Ms) continue;
    const r = labelRect(label, t0Ms, t1Ms, width);
    const style = config.class_styles[label.class];
    ctx.fillStyle = style ? style.color : '#888888';
    ctx.globalAlpha = 0.65;
    ctx.fillRect(r.x, r.y, r.w, r.h);
    ctx.globalAlpha = 1.0;
    ctx.strokeStyle = '#e8eef4';
    ctx.strokeRect(r.x, r.y, r.w, r.h);
    if (r.w > 30) {
      ctx.fillStyle = '#e8eef4';
      ctx.fillText(label.class, r.x + 3, r.y + LANE_HEIGHT - 6);
    }
  }
}
