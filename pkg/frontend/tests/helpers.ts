/** Shared test plumbing: recorded-response fixtures and a scripted
 * fetch whose served bytes are captured for payload-fidelity checks.
 */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import type { FetchInit, FetchLike } from '../src/api.js';

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), 'fixtures');

export function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), 'utf8');
}

export interface Route {
  status: number;
  body: string;
}

export interface RecordedCall {
  url: string;
  init: FetchInit;
  body: string;
}

export interface ScriptedFetch {
  fetch: FetchLike;
  calls: RecordedCall[];
}

/** Serve canned bodies by URL suffix, recording every exchange. */
export function scriptedFetch(routes: Record<string, Route>): ScriptedFetch {
  const calls: RecordedCall[] = [];
  const fetch: FetchLike = async (url, init = {}) => {
    const key = Object.keys(routes).find((suffix) => url.endsWith(suffix));
    if (key === undefined) {
      throw new TypeError(`no route for ${url}`);
    }
    const route = routes[key];
    calls.push({ url, init, body: route.body });
    return { status: route.status, text: async () => route.body };
  };
  return { fetch, calls };
}

/** A fetch whose responses release only when the test says so. */
export function gatedFetch(): {
  fetch: FetchLike;
  release: (index: number, route: Route) => void;
} {
  const gates: Array<(route: Route) => void> = [];
  const fetch: FetchLike = (url) => {
    void url;
    return new Promise((resolve) => {
      gates.push((route) =>
        resolve({ status: route.status, text: async () => route.body }),
      );
    });
  };
  return {
    fetch,
    release: (index, route) => gates[index](route),
  };
}
