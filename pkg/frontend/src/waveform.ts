/** Min/max peak extraction and waveform drawing for the strip above the
 * spectrogram. */

export interface PeakColumn {
  min: number;
  max: number;
}

export function computePeaks(samples: Float32Array, columns: number): PeakColumn[] {
  const out: PeakColumn[] = [];
  if (columns <= 0 || samples.length === 0) return out;
  const per = samples.length / columns;
  for (let c = 0; c < columns; c++) {
    const start = Math.floor(c * per);
    const end = Math.max(start + 1, Math.floor((c + 1) * per));
    let lo = samples[start];
    let hi = samples[start];
    for (let i = start + 1; i < end && i < samples.length; i++) {
      if (samples[i] < lo) lo = samples[i];
      if (samples[i] > hi) hi = samples[i];
    }
    out.push({ min: lo, max: hi });
  }
  return out;
}

export function drawWaveform(
  ctx: CanvasRenderingContext2D,
  peaks: PeakColumn[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#7fd4ff';
  const mid = height / 2;
  const colWidth = width / peaks.length;
  for (let c = 0; c < peaks.length; c++) {
    const { min, max } = peaks[c];
    const y0 = mid - max * (mid - 1);
    const y1 = mid - min * (mid - 1);
    ctx.fillRect(c * colWidth, y0, Math.max(1, colWidth), Math.max(1, y1 - y0));
  }
  ctx.strokeStyle = '#2a3b4d';
  ctx.beginPath();
  ctx.moveTo(0, mid);
  ctx.lineTo(width, mid);
  ctx.stroke();
}
