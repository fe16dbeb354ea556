import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiError, SolveGate } from '../src/api';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status, headers: { 'Content-Type': 'application/json' },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('ApiClient', () => {
  it('fetches the fixture catalog', async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, {
      fixtures: [{ name: 'simplex', description: '', params: {} }],
    }));
    vi.stubGlobal('fetch', fetchMock);
    const client = new ApiClient('http://backend');
    const { fixtures } = await client.listFixtures();
    expect(fetchMock).toHaveBeenCalledWith('http://backend/api/fixtures', undefined);
    expect(fixtures[0].name).toBe('simplex');
  });

  it('encodes fixture query parameters', async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, {}));
    vi.stubGlobal('fetch', fetchMock);
    await new ApiClient('').getFixture('strut20', { connection: 6 });
    expect(fetchMock).toHaveBeenCalledWith('/api/fixtures/strut20?connection=6', undefined);
  });

  it('surfaces server diagnostics as ApiError', async () => {
    vi.stubGlobal('fetch', vi.fn().mockResolvedValue(jsonResponse(400, {
      error: 'invalid model', problems: ['member 0: endpoints must be distinct'],
    })));
    const client = new ApiClient('');
    const failure = client.solve({ mode: 'formfind' } as never);
    await expect(failure).rejects.toThrowError(ApiError);
    await expect(failure).rejects.toMatchObject({ status: 400, message: 'invalid model' });
  });

  it('posts solve requests as JSON with the abort signal', async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, { converged: true }));
    vi.stubGlobal('fetch', fetchMock);
    const controller = new AbortController();
    await new ApiClient('').solve({ mode: 'formfind' } as never, controller.signal);
    const [, init] = fetchMock.mock.calls[0];
    expect(init.method).toBe('POST');
    expect(init.signal).toBe(controller.signal);
    expect(JSON.parse(init.body).mode).toBe('formfind');
  });
});

describe('SolveGate', () => {
  it('aborts the previous in-flight task when a new one starts', async () => {
    const gate = new SolveGate();
    const aborted: boolean[] = [];
    const first = gate.run(async (signal) => {
      await new Promise((resolve) => setTimeout(resolve, 50));
      aborted.push(signal.aborted);
      if (signal.aborted) throw new DOMException('aborted', 'AbortError');
      return 'first';
    });
    const second = gate.run(async () => 'second');
    await expect(second).resolves.toBe('second');
    await expect(first).rejects.toThrow('aborted');
    expect(aborted).toEqual([true]);
  });

  it('clears busy state after completion', async () => {
    const gate = new SolveGate();
    expect(gate.busy).toBe(false);
    const task = gate.run(async () => 42);
    expect(gate.busy).toBe(true);
    await task;
    expect(gate.busy).toBe(false);
  });
});
