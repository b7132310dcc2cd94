import { describe, expect, it } from 'vitest';

import {
  LANE_HEIGHT,
  labelRect,
  laneTop,
  lanesHeight,
  msToX,
  rectsOverlap,
  trackForClass,
  xToMs,
} from '../src/tracks.js';
import { FAKE_CONFIG } from './fakeServer.js';

describe('lane geometry', () => {
  it('labels on different tracks never occlude one another', () => {
    // identical time span, every pair of distinct tracks
    for (let a = 0; a < 4; a++) {
      for (let b = a + 1; b < 4; b++) {
        const ra = labelRect({ track: a, start_ms: 0, end_ms: 5000 }, 0, 15000, 1200);
        const rb = labelRect({ track: b, start_ms: 0, end_ms: 5000 }, 0, 15000, 1200);
        expect(rectsOverlap(ra, rb)).toBe(false);
      }
    }
  });

  it('lanes are stacked with a gap', () => {
    expect(laneTop(0)).toBe(0);
    expect(laneTop(1)).toBeGreaterThanOrEqual(LANE_HEIGHT);
    expect(lanesHeight(FAKE_CONFIG.layout)).toBeGreaterThan(3 * LANE_HEIGHT);
  });

  it('time to pixel mapping round-trips', () => {
    const ms = xToMs(msToX(7321, 5000, 20000, 1200), 5000, 20000, 1200);
    expect(ms).toBeCloseTo(7321, 6);
  });

  it('classes map to their configured tracks', () => {
    expect(trackForClass(FAKE_CONFIG.layout, 'inspiration')).toBe(0);
    expect(trackForClass(FAKE_CONFIG.layout, 'wheeze')).toBe(1);
    expect(trackForClass(FAKE_CONFIG.layout, 'discontinuous')).toBe(2);
    expect(trackForClass(FAKE_CONFIG.layout, 'noise')).toBe(3);
  });

  it('rect width is proportional to duration', () => {
    const r = labelRect({ track: 0, start_ms: 0, end_ms: 7500 }, 0, 15000, 1200);
    expect(r.x).toBe(0);
    expect(r.w).toBeCloseTo(600, 6);
  });
});
