/** Acceptance scenarios for the labeling UI, driven against an in-memory
 * server that mirrors the HTTP API's journal and revision semantics. */

import { describe, expect, it } from 'vitest';

import { Session } from '../src/session.js';
import { FAKE_CONFIG, FakeClock, FakeServer } from './fakeServer.js';

describe('labeling round trip', () => {
  it('drag-created wheeze label survives a killed and reopened tab', async () => {
    const server = new FakeServer({ breath1: 16000 });
    const clock = new FakeClock();
    const tab1 = await Session.open(server, 'breath1', 'alice', FAKE_CONFIG, 16000, clock.now);

    const label = tab1.createLabelGesture(0.5, 1.43, 'wheeze');
    expect(label).not.toBeNull();
    expect(label!.start_ms).toBe(500);
    expect(label!.end_ms).toBe(1430);
    expect(tab1.labels).toHaveLength(1); // optimistic echo before any flush

    // not yet flushed before the autosave interval elapses
    clock.advance(FAKE_CONFIG.autosave_interval_ms - 1);
    expect(await tab1.tick()).toBe(false);
    clock.advance(1);
    expect(await tab1.tick()).toBe(true); // one autosave interval after the edit
    expect(tab1.pendingCount).toBe(0);

    // "kill the tab": drop the session object entirely, then reopen
    const tab2 = await Session.open(server, 'breath1', 'alice', FAKE_CONFIG, 16000, clock.now);
    expect(tab2.labels).toHaveLength(1);
    expect(tab2.labels[0].class).toBe('wheeze');
    expect(tab2.labels[0].start_ms).toBe(500);
    expect(tab2.labels[0].end_ms).toBe(1430);
  });

  it('same-track overlapping drag is rejected and visually rolled back', async () => {
    const server = new FakeServer({ breath1: 16000 });
    const clock = new FakeClock();
    const session = await Session.open(server, 'breath1', 'alice', FAKE_CONFIG, 16000, clock.now);

    expect(session.createLabelGesture(0.5, 1.43, 'wheeze')).not.toBeNull();
    const before = session.labels.map((l) => ({ ...l }));

    // stridor shares the continuous track with wheeze: must be rejected
    const rejected = session.createLabelGesture(1.0, 2.0, 'stridor');
    expect(rejected).toBeNull();
    expect(session.labels).toEqual(before); // geometry restored
    expect(session.violation).toMatch(/overlap/);

    // the rejected gesture never queued an event; flush carries one add only
    clock.advance(FAKE_CONFIG.autosave_interval_ms);
    await session.tick();
    const reopened = await Session.open(server, 'breath1', 'alice', FAKE_CONFIG, 16000);
    expect(reopened.labels).toHaveLength(1);
    expect(reopened.labels[0].class).toBe('wheeze');
  });
});

describe('STFT controls', () => {
  it('param change refetches tiles with new params; dB endpoints are floor_db and 0', async () => {
    const server = new FakeServer({ breath1: 16000 });
    const session = await Session.open(server, 'breath1', 'alice', FAKE_CONFIG, 16000);

    await session.visibleTile();
    expect(server.tileRequests).toHaveLength(1);
    expect(server.tileRequests[0]).toMatchObject({ win: 256, hop: 64, floor_db: -80.0 });
    expect(session.displayedDbRange()).toEqual([-80.0, 0.0]);

    // unchanged view + params hits the cache: no extra request
    await session.visibleTile();
    expect(server.tileRequests).toHaveLength(1);

    expect(
      session.setStft({ window_size: 512, hop_size: 128, window_fn: 'hann', floor_db: -50.0 }),
    ).toBe(true);
    await session.visibleTile();
    expect(server.tileRequests).toHaveLength(2);
    expect(server.tileRequests[1]).toMatchObject({ win: 512, hop: 128, floor_db: -50.0 });
    expect(session.displayedDbRange()).toEqual([-50.0, 0.0]);
  });

  it('invalid combinations are refused before any request', async () => {
    const server = new FakeServer({ breath1: 16000 });
    const session = await Session.open(server, 'breath1', 'alice', FAKE_CONFIG, 16000);
    // hop > win
    expect(
      session.setStft({ window_size: 256, hop_size: 512, window_fn: 'hann', floor_db: -80 }),
    ).toBe(false);
    // non power-of-two window
    expect(
      session.setStft({ window_size: 300, hop_size: 64, window_fn: 'hann', floor_db: -80 }),
    ).toBe(false);
    // non-negative floor
    expect(
      session.setStft({ window_size: 256, hop_size: 64, window_fn: 'hann', floor_db: 0 }),
    ).toBe(false);
    expect(server.tileRequests).toHaveLength(0);
  });
});
