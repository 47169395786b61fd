/** Dashboard view state and its legal transitions.
 *
 * The state is a plain immutable value; every user gesture maps to a
 * pure transition function so the whole interaction loop is testable
 * without a DOM. The project/metric/frequency triple is encoded in the
 * URL path mirroring the public dashboard route, making every view
 * shareable as a link.
 */

export type Metric = 'kloc' | 'density' | 'spoilage' | 'issues';
export type Frequency = 'week' | 'month';
export type Comparison = 'single' | 'dual' | 'multi';
export type ChartKind = 'line' | 'bar' | 'pie' | 'table';

export const METRICS: readonly Metric[] = ['kloc', 'density', 'spoilage', 'issues'];
export const FREQUENCIES: readonly Frequency[] = ['week', 'month'];
export const COMPARISONS: readonly Comparison[] = ['single', 'dual', 'multi'];
export const CHART_KINDS: readonly ChartKind[] = ['line', 'bar', 'pie', 'table'];

export interface DashboardState {
  project: string;
  metric: Metric;
  frequency: Frequency;
  /** Selected years, sorted ascending; empty means no filter. */
  yearFilter: readonly number[];
  comparison: Comparison;
  chartKind: ChartKind;
}

export function initialState(project: string): DashboardState {
  return {
    project,
    metric: 'density',
    frequency: 'week',
    yearFilter: [],
    comparison: 'single',
    chartKind: 'line',
  };
}

export function setProject(state: DashboardState, project: string): DashboardState {
  // A new project has its own span of years, so the filter resets.
  return { ...state, project, yearFilter: [] };
}

export function setMetric(state: DashboardState, metric: Metric): DashboardState {
  return { ...state, metric };
}

/** Switching frequency preserves metric, comparison, and filters. */
export function setFrequency(state: DashboardState, frequency: Frequency): DashboardState {
  return { ...state, frequency };
}

/**
 * Replace the year filter. Years outside the loaded series are
 * dropped so the filter is always a subset of the years on screen.
 */
export function setYearFilter(
  state: DashboardState,
  years: Iterable<number>,
  availableYears: readonly number[],
): DashboardState {
  const allowed = new Set(availableYears);
  const kept = [...new Set(years)].filter((y) => allowed.has(y)).sort((a, b) => a - b);
  return { ...state, yearFilter: kept };
}

export function toggleYear(
  state: DashboardState,
  year: number,
  availableYears: readonly number[],
): DashboardState {
  const current = new Set(state.yearFilter);
  if (current.has(year)) {
    current.delete(year);
  } else {
    current.add(year);
  }
  return setYearFilter(state, current, availableYears);
}

export function clearYearFilter(state: DashboardState): DashboardState {
  return { ...state, yearFilter: [] };
}

/**
 * Bar charts are offered only on single-series views; entering a
 * comparison mode falls back to a line chart.
 */
export function setComparison(state: DashboardState, comparison: Comparison): DashboardState {
  const chartKind =
    comparison !== 'single' && state.chartKind === 'bar' ? 'line' : state.chartKind;
  return { ...state, comparison, chartKind };
}

export function setChartKind(state: DashboardState, chartKind: ChartKind): DashboardState {
  if (chartKind === 'bar' && state.comparison !== 'single') {
    return state;
  }
  return { ...state, chartKind };
}

/**
 * Names of the series a state plots. Single mode plots the selected
 * metric (the issues metric is itself a bundle of four counters);
 * dual mode overlays the metric against kloc on independent axes;
 * multi mode overlays the four issue counters against density.
 */
export function selectedSeries(state: DashboardState): string[] {
  const issueFields = ['open', 'closed', 'openCumulative', 'closedCumulative'];
  switch (state.comparison) {
    case 'single':
      return state.metric === 'issues' ? issueFields : [state.metric];
    case 'dual':
      return state.metric === 'kloc' ? ['kloc', 'density'] : [state.metric, 'kloc'];
    case 'multi':
      return [...issueFields, 'density'];
  }
}

/** URL path for a state, mirroring the public dashboard route. */
export function statePath(state: DashboardState): string {
  return `/dash/public/${state.frequency}/${state.metric}/${encodeURIComponent(state.project)}`;
}

/** Query string for the parts of the state the route path cannot carry. */
export function stateQuery(state: DashboardState): string {
  const params = new URLSearchParams();
  if (state.yearFilter.length > 0) {
    params.set('years', state.yearFilter.join(','));
  }
  if (state.comparison !== 'single') {
    params.set('compare', state.comparison);
  }
  if (state.chartKind !== 'line') {
    params.set('chart', state.chartKind);
  }
  const text = params.toString();
  return text ? `?${text}` : '';
}

export function stateUrl(state: DashboardState): string {
  return statePath(state) + stateQuery(state);
}

/** Parse a deep link back into a state; null when the path is foreign. */
export function parseStateUrl(path: string, query: string): DashboardState | null {
  const match = path.match(/^\/dash\/public\/([^/]+)\/([^/]+)\/([^/]+)\/?$/);
  if (!match) {
    return null;
  }
  const [, frequency, metric, project] = match;
  if (!FREQUENCIES.includes(frequency as Frequency)) {
    return null;
  }
  if (!METRICS.includes(metric as Metric)) {
    return null;
  }
  const state = {
    ...initialState(decodeURIComponent(project)),
    frequency: frequency as Frequency,
    metric: metric as Metric,
  };
  const params = new URLSearchParams(query);
  const years = params.get('years');
  const yearFilter = years
    ? years
        .split(',')
        .map((y) => Number.parseInt(y, 10))
        .filter((y) => Number.isFinite(y))
        .sort((a, b) => a - b)
    : [];
  const compare = params.get('compare');
  const comparison = COMPARISONS.includes(compare as Comparison)
    ? (compare as Comparison)
    : 'single';
  const chart = params.get('chart');
  const chartKind = CHART_KINDS.includes(chart as ChartKind) ? (chart as ChartKind) : 'line';
  return setChartKind(setComparison({ ...state, yearFilter }, comparison), chartKind);
}
