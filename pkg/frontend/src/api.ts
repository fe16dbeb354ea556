// HTTP client for the solve API. The explorer is a pure client: every number
// it shows comes from the backend, never from re-deriving numerics here.

import type {
  BatchRequest, BatchResult, FixtureInfo, ModelFile, SolveRequest, SolveResult,
} from './types';

export class ApiError extends Error {
  readonly status: number;
  readonly payload: unknown;

  constructor(status: number, payload: unknown) {
    const detail =
      payload && typeof payload === 'object' && 'error' in payload
        ? String((payload as { error: unknown }).error)
        : `HTTP ${status}`;
    super(detail);
    this.status = status;
    this.payload = payload;
  }
}

async function readJson(response: Response): Promise<unknown> {
  const text = await response.text();
  try {
    return JSON.parse(text);
  } catch {
    return { error: text || `HTTP ${response.status}` };
  }
}

export class ApiClient {
  constructor(private readonly base: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    const payload = await readJson(response);
    if (!response.ok) {
      throw new ApiError(response.status, payload);
    }
    return payload as T;
  }

  async health(): Promise<boolean> {
    try {
      await this.request('/healthz');
      return true;
    } catch {
      return false;
    }
  }

  listFixtures(): Promise<{ fixtures: FixtureInfo[] }> {
    return this.request('/api/fixtures');
  }

  getFixture(name: string, params?: Record<string, number>): Promise<ModelFile> {
    const query = params && Object.keys(params).length
      ? '?' + new URLSearchParams(
          Object.entries(params).map(([k, v]) => [k, String(v)]),
        ).toString()
      : '';
    return this.request(`/api/fixtures/${name}${query}`);
  }

  solve(request: SolveRequest, signal?: AbortSignal): Promise<SolveResult> {
    return this.request('/api/solve', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
      signal,
    });
  }

  solveBatch(request: BatchRequest, signal?: AbortSignal): Promise<BatchResult> {
    return this.request('/api/solve/batch', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(request),
      signal,
    });
  }
}

/**
 * At most one solve in flight per session: starting a new one cancels the
 * previous request (cancel, not queue).
 */
export class SolveGate {
  private controller: AbortController | null = null;

  async run<T>(task: (signal: AbortSignal) => Promise<T>): Promise<T> {
    this.controller?.abort();
    const controller = new AbortController();
    this.controller = controller;
    try {
      return await task(controller.signal);
    } finally {
      if (this.controller === controller) {
        this.controller = null;
      }
    }
  }

  get busy(): boolean {
    return this.controller !== null;
  }
}
