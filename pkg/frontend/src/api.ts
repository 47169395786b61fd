/** Thin client over the metrics REST API.
 *
 * The fetch implementation is injected so tests replay recorded
 * responses. Each view key allows at most one in-flight request:
 * starting a new one aborts the previous, and a response that lost the
 * race is discarded instead of rendered stale.
 */

import type { DashEnvelope, ProjectDoc, ProjectListing, WireError } from './wire.js';

export interface FetchResponse {
  status: number;
  text(): Promise<string>;
}

export interface FetchInit {
  method?: string;
  headers?: Record<string, string>;
  body?: string;
  signal?: AbortSignal;
}

export type FetchLike = (url: string, init?: FetchInit) => Promise<FetchResponse>;

/** A non-2xx API reply, carrying the served error document. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly payload: WireError,
  ) {
    super(`${status}: ${payload.error}`);
  }
}

/** The response arrived after a newer request for the same view. */
export class StaleResponseError extends Error {
  constructor() {
    super('superseded by a newer request');
  }
}

export interface Loaded<T> {
  payload: T;
  /** The exact bytes served, for payload-fidelity assertions. */
  raw: string;
  status: number;
}

export class ApiClient {
  private inflight = new Map<string, { controller: AbortController; seq: number }>();
  private counter = 0;

  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) =>
      fetch(url, init) as Promise<FetchResponse>,
  ) {}

  /** One fetch per key: a newer call aborts and supersedes this one. */
  private async request(key: string, url: string, init: FetchInit = {}): Promise<Loaded<unknown>> {
    const previous = this.inflight.get(key);
    if (previous) {
      previous.controller.abort();
    }
    const controller = new AbortController();
    const seq = ++this.counter;
    this.inflight.set(key, { controller, seq });
    const response = await this.fetchImpl(this.baseUrl + url, {
      ...init,
      signal: controller.signal,
    });
    const raw = await response.text();
    const current = this.inflight.get(key);
    if (!current || current.seq !== seq) {
      throw new StaleResponseError();
    }
    this.inflight.delete(key);
    const payload = JSON.parse(raw) as unknown;
    if (response.status < 200 || response.status >= 300) {
      throw new ApiError(response.status, payload as WireError);
    }
    return { payload, raw, status: response.status };
  }

  /** Dashboard series: all metrics, or one, at the given frequency. */
  async loadDash(
    frequency: string,
    metric: string | null,
    project: string,
  ): Promise<Loaded<DashEnvelope>> {
    const path = metric
      ? `/dash/public/${frequency}/${metric}/${encodeURIComponent(project)}`
      : `/dash/public/${frequency}/${encodeURIComponent(project)}`;
    return (await this.request('dash', path)) as Loaded<DashEnvelope>;
  }

  async loadProjects(page = 1, perPage = 20): Promise<Loaded<ProjectListing>> {
    return (await this.request(
      'projects',
      `/api/projects?page=${page}&per_page=${perPage}`,
    )) as Loaded<ProjectListing>;
  }

  async loadPending(page = 1, perPage = 20): Promise<Loaded<ProjectListing>> {
    return (await this.request(
      'pending',
      `/projects/pending?page=${page}&per_page=${perPage}`,
    )) as Loaded<ProjectListing>;
  }

  /** POST a track request; 200 means the triple was already known. */
  async submitTrack(
    owner: string,
    name: string,
    branch: string,
  ): Promise<{ record: ProjectDoc; alreadyRequested: boolean }> {
    const loaded = await this.request('track', '/other/requests/track', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ owner, name, branch }),
    });
    // 202 acknowledges a new request; 200 returns the existing record.
    return {
      record: loaded.payload as ProjectDoc,
      alreadyRequested: loaded.status === 200,
    };
  }
}
