import { describe, expect, it } from 'vitest';

import { loadExemplars, storeSelection } from '../src/goldpanel.js';
import { FakeServer } from './fakeServer.js';

describe('gold-standard panel', () => {
  it('shows a placeholder when no exemplars are stored', async () => {
    const server = new FakeServer({ r: 60000 });
    const panel = await loadExemplars(server, 'wheeze');
    expect(panel.clips).toEqual([]);
    expect(panel.placeholder).toMatch(/no reference clips/);
  });

  it('stores the current selection and lists it back', async () => {
    const server = new FakeServer({ r: 60000 });
    const clip = await storeSelection(server, 'r', 'wheeze', 100, 900, 'alice', 'textbook');
    expect(clip.clip_id).toBeTruthy();
    const panel = await loadExemplars(server, 'wheeze');
    expect(panel.clips).toHaveLength(1);
    expect(panel.clips[0].note).toBe('textbook');
    expect(panel.placeholder).toBeNull();
    // other classes stay empty
    expect((await loadExemplars(server, 'stridor')).clips).toEqual([]);
  });

  it('rejects an out-of-range selection', async () => {
    const server = new FakeServer({ r: 1000 });
    await expect(storeSelection(server, 'r', 'wheeze', 0, 5000, 'alice')).rejects.toThrow();
  });
});
