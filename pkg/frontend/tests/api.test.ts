import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError, StaleResponseError } from '../src/api.js';
import type { DashEnvelope, ProjectListing } from '../src/wire.js';
import { fixture, gatedFetch, scriptedFetch } from './helpers.js';

describe('dashboard API client', () => {
  it('loads a dashboard envelope and preserves the served bytes', async () => {
    const body = fixture('dash_week_go.json');
    const { fetch, calls } = scriptedFetch({ '/dash/public/week/go': { status: 200, body } });
    const client = new ApiClient('http://api', fetch);
    const loaded = await client.loadDash('week', null, 'go');
    expect(calls[0].url).toBe('http://api/dash/public/week/go');
    expect(loaded.raw).toBe(body);
    expect(loaded.payload.project).toBe('go');
    expect(loaded.payload.frequency).toBe('week');
    expect(loaded.payload.available_metrics).toContain('density');
  });

  it('hits the single-metric route when a metric is named', async () => {
    const body = fixture('dash_week_density_go.json');
    const { fetch, calls } = scriptedFetch({
      '/dash/public/week/density/go': { status: 200, body },
    });
    const loaded = await new ApiClient('', fetch).loadDash('week', 'density', 'go');
    expect(calls[0].url).toBe('/dash/public/week/density/go');
    const payload = loaded.payload as DashEnvelope;
    expect(payload.series[0]).toHaveProperty('density');
    expect(payload.series[0]).not.toHaveProperty('spoilage');
  });

  it('surfaces an untracked project as a 404 ApiError', async () => {
    const body = fixture('dash_week_missing.json');
    const { fetch } = scriptedFetch({
      '/dash/public/week/nonesuch': { status: 404, body },
    });
    const client = new ApiClient('', fetch);
    await expect(client.loadDash('week', null, 'nonesuch')).rejects.toMatchObject({
      status: 404,
      payload: { error: 'unknown_project' },
    });
  });

  it('lists projects through the paginated route', async () => {
    const body = fixture('projects.json');
    const { fetch, calls } = scriptedFetch({
      '/api/projects?page=1&per_page=20': { status: 200, body },
    });
    const loaded = await new ApiClient('', fetch).loadProjects();
    const payload = loaded.payload as ProjectListing;
    expect(calls).toHaveLength(1);
    expect(payload.total).toBe(1);
    expect(payload.projects[0].name).toBe('go');
    expect(payload.projects[0].state).toBe('tracked');
  });

  it('discards a response that lost the race to a newer request', async () => {
    const { fetch, release } = gatedFetch();
    const client = new ApiClient('', fetch);
    const weekBody = fixture('dash_week_go.json');
    const monthBody = fixture('dash_month_go.json');

    const first = client.loadDash('week', null, 'go');
    const second = client.loadDash('month', null, 'go');
    // The older response arrives after the newer request started.
    release(1, { status: 200, body: monthBody });
    release(0, { status: 200, body: weekBody });

    await expect(first).rejects.toBeInstanceOf(StaleResponseError);
    const loaded = await second;
    expect(loaded.payload.frequency).toBe('month');
  });

  it('aborts the superseded request', async () => {
    const body = fixture('dash_week_go.json');
    const signals: (AbortSignal | undefined)[] = [];
    const client = new ApiClient('', async (url, init) => {
      void url;
      signals.push(init?.signal);
      return { status: 200, text: async () => body };
    });
    const first = client.loadDash('week', null, 'go');
    const second = client.loadDash('week', null, 'go');
    await expect(first).rejects.toBeInstanceOf(StaleResponseError);
    await second;
    expect(signals[0]?.aborted).toBe(true);
    expect(signals[1]?.aborted).toBe(false);
  });

  it('reports a fresh track request distinctly from a duplicate', async () => {
    const record = JSON.stringify({
      project_id: 'abc',
      owner: 'golang',
      name: 'go',
      branch: 'master',
      state: 'pending',
      requested_at: '2015-01-12T00:00:00Z',
      last_analyzed_at: null,
      failure_reason: null,
    });
    const fresh = scriptedFetch({ '/other/requests/track': { status: 202, body: record } });
    const client = new ApiClient('', fresh.fetch);
    const accepted = await client.submitTrack('golang', 'go', 'master');
    expect(accepted.alreadyRequested).toBe(false);
    expect(accepted.record.state).toBe('pending');
    expect(fresh.calls[0].init.method).toBe('POST');
    expect(JSON.parse(fresh.calls[0].init.body ?? '')).toEqual({
      owner: 'golang',
      name: 'go',
      branch: 'master',
    });

    const dup = scriptedFetch({ '/other/requests/track': { status: 200, body: record } });
    const repeated = await new ApiClient('', dup.fetch).submitTrack('golang', 'go', 'master');
    expect(repeated.alreadyRequested).toBe(true);
  });

  it('surfaces validation rejections with the served detail', async () => {
    const body = JSON.stringify({
      error: 'invalid_identifiers',
      detail: "malformed branch: ''",
    });
    const { fetch } = scriptedFetch({ '/other/requests/track': { status: 422, body } });
    const client = new ApiClient('', fetch);
    await expect(client.submitTrack('golang', 'go', '')).rejects.toMatchObject({
      status: 422,
      payload: { error: 'invalid_identifiers' },
    });
    try {
      await client.submitTrack('golang', 'go', '');
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
    }
  });
});
