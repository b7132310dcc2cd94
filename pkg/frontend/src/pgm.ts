/** Decoder for the binary PGM (P5) graymaps the tile endpoint returns. */

export interface Graymap {
  width: number;
  height: number;
  maxVal: number;
  pixels: Uint8Array; // row-major, height x width
}

export function decodePgm(bytes: Uint8Array): Graymap {
  // Header is ASCII tokens (magic, width, height, maxval) separated by
  // whitespace, followed by exactly one whitespace byte before the raster.
  const tokens: string[] = [];
  let i = 0;
  while (tokens.length < 4) {
    while (i < bytes.length && isSpace(bytes[i])) i++;
    if (i < bytes.length && bytes[i] === 0x23) {
      // '#' comment runs to end of line
      while (i < bytes.length && bytes[i] !== 0x0a) i++;
      continue;
    }
    let start = i;
    while (i < bytes.length && !isSpace(bytes[i])) i++;
    if (start === i) throw new Error('truncated PGM header');
    tokens.push(String.fromCharCode(...bytes.subarray(start, i)));
  }
  i++; // single whitespace separating header from raster
  const [magic, w, h, maxVal] = tokens;
  if (magic !== 'P5') throw new Error(`not a binary PGM: ${magic}`);
  const width = parseInt(w, 10);
  const height = parseInt(h, 10);
  const max = parseInt(maxVal, 10);
  if (!(width > 0 && height > 0 && max > 0 && max < 65536)) {
    throw new Error('bad PGM dimensions');
  }
  if (max > 255) throw new Error('16-bit PGM not supported');
  const pixels = bytes.subarray(i, i + width * height);
  if (pixels.length !== width * height) throw new Error('truncated PGM raster');
  return { width, height, maxVal: max, pixels };
}

function isSpace(b: number): boolean {
  return b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d;
}

/** Gray value back to decibels given the tile's dB range. */
export function grayToDb(gray: number, dbMin: number, dbMax: number): number {
  return dbMin + (gray / 255) * (dbMax - dbMin);
}
