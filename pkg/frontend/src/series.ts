/** Pure projections over loaded wire samples: year filtering and
 * per-series value extraction. No arithmetic happens here beyond
 * picking fields out of payloads — filtering is client-side, so
 * clearing a filter never refetches.
 */

import type { WireSample } from './wire.js';

/** Field names a chart can plot; each maps to one payload field. */
export type SeriesField =
  | 'kloc'
  | 'density'
  | 'spoilage'
  | 'open'
  | 'closed'
  | 'openCumulative'
  | 'closedCumulative';

export const SERIES_LABELS: Record<SeriesField, string> = {
  kloc: 'KLOC',
  density: 'issue density',
  spoilage: 'issue spoilage (days)',
  open: 'issues opened',
  closed: 'issues closed',
  openCumulative: 'open cumulative',
  closedCumulative: 'closed cumulative',
};

export function sampleYear(sample: WireSample): number {
  return Number.parseInt(sample.start_date.slice(0, 4), 10);
}

/** Distinct years with samples, ascending — the pie chart's segments. */
export function yearsPresent(samples: readonly WireSample[]): number[] {
  return [...new Set(samples.map(sampleYear))].sort((a, b) => a - b);
}

/** Samples per year, in ascending year order. */
export function yearCounts(samples: readonly WireSample[]): Map<number, number> {
  const counts = new Map<number, number>();
  for (const year of yearsPresent(samples)) {
    counts.set(year, 0);
  }
  for (const sample of samples) {
    const year = sampleYear(sample);
    counts.set(year, (counts.get(year) ?? 0) + 1);
  }
  return counts;
}

/**
 * Keep samples whose window start falls in one of the selected years.
 * An empty selection means "all years" and returns the input as-is.
 */
export function filterByYears(
  samples: readonly WireSample[],
  years: readonly number[],
): readonly WireSample[] {
  if (years.length === 0) {
    return samples;
  }
  const wanted = new Set(years);
  return samples.filter((s) => wanted.has(sampleYear(s)));
}

/**
 * Read one field off every sample. A density served as null (window
 * without measurable code) stays null so charts can render a gap
 * instead of inventing a zero.
 */
export function fieldValues(
  samples: readonly WireSample[],
  field: SeriesField,
): (number | null)[] {
  return samples.map((sample) => {
    switch (field) {
      case 'kloc':
        return sample.kloc;
      case 'density':
        return sample.density ?? null;
      case 'spoilage':
        return sample.spoilage ?? null;
      case 'open':
        return sample.issues.open;
      case 'closed':
        return sample.issues.closed;
      case 'openCumulative':
        return sample.issues.openCumulative;
      case 'closedCumulative':
        return sample.issues.closedCumulative;
    }
  });
}
