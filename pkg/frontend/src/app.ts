/** DOM wiring: renders the chart models as SVG, keeps the view state
 * in sync with the URL, and drives the API client. All numbers on
 * screen come straight out of the models in chart.ts, which in turn
 * copy payload fields verbatim.
 */

import { ApiClient, ApiError, StaleResponseError } from './api.js';
import { buildChart, buildPie, buildTable } from './chart.js';
import type { ChartModel, PieSlice, TableModel } from './chart.js';
import { filterByYears, yearsPresent } from './series.js';
import {
  initialState,
  parseStateUrl,
  setChartKind,
  setComparison,
  setFrequency,
  setMetric,
  setProject,
  setYearFilter,
  stateUrl,
  toggleYear,
  CHART_KINDS,
  COMPARISONS,
  FREQUENCIES,
  METRICS,
} from './state.js';
import type { ChartKind, Comparison, DashboardState, Frequency, Metric } from './state.js';
import type { WireSample } from './wire.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const WIDTH = 880;
const HEIGHT = 360;
const MARGIN = { top: 16, right: 64, bottom: 48, left: 72 };
const COLORS = ['#1f6feb', '#d29922', '#2da44e', '#cf222e', '#8250df'];

declare global {
  interface Window {
    REPOPULSE_API_BASE?: string;
  }
}

interface AppContext {
  client: ApiClient;
  state: DashboardState;
  samples: readonly WireSample[];
  loading: boolean;
  error: string | null;
  notTracked: boolean;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function svgEl(tag: string, attrs: Record<string, string> = {}): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function scaleY(value: number, min: number, max: number): number {
  const usable = HEIGHT - MARGIN.top - MARGIN.bottom;
  return MARGIN.top + usable * (1 - (value - min) / (max - min));
}

function scaleX(index: number, count: number): number {
  const usable = WIDTH - MARGIN.left - MARGIN.right;
  if (count <= 1) {
    return MARGIN.left + usable / 2;
  }
  return MARGIN.left + (usable * index) / (count - 1);
}

function renderLineChart(model: ChartModel): SVGElement {
  const svg = svgEl('svg', {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    class: 'chart',
    role: 'img',
  });
  const n = model.labels.length;
  for (const axis of [model.left, model.right]) {
    if (!axis) {
      continue;
    }
    const x = axis.side === 'left' ? MARGIN.left : WIDTH - MARGIN.right;
    for (const tick of axis.ticks) {
      const y = scaleY(tick, axis.min, axis.max);
      const label = svgEl('text', {
        x: String(axis.side === 'left' ? x - 8 : x + 8),
        y: String(y + 4),
        'text-anchor': axis.side === 'left' ? 'end' : 'start',
        class: 'tick',
      });
      label.textContent = tick.toPrecision(4);
      svg.appendChild(label);
      if (axis.side === 'left') {
        svg.appendChild(
          svgEl('line', {
            x1: String(MARGIN.left),
            x2: String(WIDTH - MARGIN.right),
            y1: String(y),
            y2: String(y),
            class: 'grid',
          }),
        );
      }
    }
  }
  model.series.forEach((series, si) => {
    const axis = series.axis === 'right' && model.right ? model.right : model.left;
    const color = COLORS[si % COLORS.length];
    if (model.kind === 'bar') {
      const band = (WIDTH - MARGIN.left - MARGIN.right) / Math.max(n, 1);
      series.points.forEach((point, i) => {
        if (point.y === null) {
          return;
        }
        const zero = scaleY(Math.max(axis.min, 0), axis.min, axis.max);
        const top = scaleY(point.y, axis.min, axis.max);
        svg.appendChild(
          svgEl('rect', {
            x: String(MARGIN.left + band * i + band * 0.15),
            y: String(Math.min(top, zero)),
            width: String(band * 0.7),
            height: String(Math.abs(zero - top)),
            fill: color,
            'data-x': point.x,
            'data-y': String(point.y),
          }),
        );
      });
      return;
    }
    let path = '';
    series.points.forEach((point, i) => {
      if (point.y === null) {
        path += ' ';
        return;
      }
      const x = scaleX(i, n);
      const y = scaleY(point.y, axis.min, axis.max);
      path += `${path.endsWith(' ') || path === '' ? 'M' : 'L'}${x.toFixed(1)},${y.toFixed(1)}`;
      svg.appendChild(
        svgEl('circle', {
          cx: x.toFixed(1),
          cy: y.toFixed(1),
          r: '2.5',
          fill: color,
          'data-series': series.field,
          'data-x': point.x,
          'data-y': String(point.y),
        }),
      );
    });
    svg.appendChild(svgEl('path', { d: path.trim(), stroke: color, fill: 'none' }));
  });
  // X labels: first, last, and a few in between.
  const step = Math.max(1, Math.floor(n / 8));
  model.labels.forEach((label, i) => {
    if (i % step !== 0 && i !== n - 1) {
      return;
    }
    const text = svgEl('text', {
      x: String(scaleX(i, n)),
      y: String(HEIGHT - MARGIN.bottom + 18),
      'text-anchor': 'middle',
      class: 'tick',
    });
    text.textContent = label.slice(0, 10);
    svg.appendChild(text);
  });
  return svg;
}

function renderPie(slices: PieSlice[], onToggle: (year: number) => void): SVGElement {
  const size = 160;
  const r = 64;
  const svg = svgEl('svg', { viewBox: `0 0 ${size} ${size}`, class: 'pie' });
  let angle = -Math.PI / 2;
  slices.forEach((slice, i) => {
    const sweep = slice.fraction * 2 * Math.PI;
    const x0 = size / 2 + r * Math.cos(angle);
    const y0 = size / 2 + r * Math.sin(angle);
    const x1 = size / 2 + r * Math.cos(angle + sweep);
    const y1 = size / 2 + r * Math.sin(angle + sweep);
    const large = sweep > Math.PI ? 1 : 0;
    const path = svgEl('path', {
      d:
        slices.length === 1
          ? `M${size / 2},${size / 2 - r} A${r},${r} 0 1 1 ${size / 2 - 0.01},${size / 2 - r} Z`
          : `M${size / 2},${size / 2} L${x0},${y0} A${r},${r} 0 ${large} 1 ${x1},${y1} Z`,
      fill: COLORS[i % COLORS.length],
      class: slice.selected ? 'slice selected' : 'slice',
      'data-year': String(slice.year),
    });
    path.addEventListener('click', () => onToggle(slice.year));
    svg.appendChild(path);
    angle += sweep;
  });
  return svg;
}

function renderTable(table: TableModel): HTMLTableElement {
  const node = el('table', { class: 'data-table' });
  const head = node.createTHead().insertRow();
  for (const column of table.columns) {
    head.appendChild(el('th', {}, column));
  }
  const body = node.createTBody();
  for (const row of table.rows) {
    const tr = body.insertRow();
    for (const cell of row) {
      tr.insertCell().textContent = cell === null ? '—' : String(cell);
    }
  }
  return node;
}

export function mount(root: HTMLElement, client: ApiClient): void {
  const ctx: AppContext = {
    client,
    state:
      parseStateUrl(window.location.pathname, window.location.search) ?? initialState(''),
    samples: [],
    loading: false,
    error: null,
    notTracked: false,
  };

  const controls = el('div', { class: 'controls' });
  const banner = el('div', { class: 'banner' });
  const chartHost = el('div', { class: 'chart-host' });
  const pieHost = el('div', { class: 'pie-host' });
  const tableHost = el('div', { class: 'table-host' });
  const form = trackForm(client);
  root.append(controls, banner, chartHost, pieHost, tableHost, form);

  function apply(next: DashboardState, refetch: boolean): void {
    ctx.state = next;
    window.history.pushState(null, '', stateUrl(next));
    if (refetch) {
      void load();
    } else {
      render();
    }
  }

  async function load(): Promise<void> {
    if (!ctx.state.project) {
      ctx.samples = [];
      render();
      return;
    }
    ctx.loading = true;
    ctx.error = null;
    ctx.notTracked = false;
    render();
    try {
      // The overview route carries every metric, so comparison modes
      // and metric switches re-render without another fetch.
      const { payload } = await client.loadDash(ctx.state.frequency, null, ctx.state.project);
      ctx.samples = payload.series;
      ctx.state = setYearFilter(ctx.state, ctx.state.yearFilter, yearsPresent(ctx.samples));
    } catch (err) {
      if (err instanceof StaleResponseError) {
        return;
      }
      ctx.samples = [];
      if (err instanceof ApiError && err.status === 404) {
        ctx.notTracked = true;
      } else {
        ctx.error = err instanceof Error ? err.message : String(err);
      }
    } finally {
      ctx.loading = false;
    }
    render();
  }

  function render(): void {
    controls.replaceChildren(
      projectPicker(),
      choiceRow('metric', METRICS, ctx.state.metric, (value) =>
        apply(setMetric(ctx.state, value as Metric), false),
      ),
      choiceRow('frequency', FREQUENCIES, ctx.state.frequency, (value) =>
        apply(setFrequency(ctx.state, value as Frequency), true),
      ),
      choiceRow('compare', COMPARISONS, ctx.state.comparison, (value) =>
        apply(setComparison(ctx.state, value as Comparison), false),
      ),
      choiceRow('chart', CHART_KINDS, ctx.state.chartKind, (value) =>
        apply(setChartKind(ctx.state, value as ChartKind), false),
      ),
    );

    banner.replaceChildren();
    chartHost.replaceChildren();
    pieHost.replaceChildren();
    tableHost.replaceChildren();
    if (ctx.loading) {
      banner.append(el('p', { class: 'loading' }, 'loading…'));
      return;
    }
    if (ctx.notTracked) {
      banner.append(
        el('p', { class: 'error' }, `${ctx.state.project} is not tracked.`),
        el('a', { href: '#track' }, 'Request tracking below.'),
      );
      return;
    }
    if (ctx.error) {
      const retry = el('button', {}, 'retry');
      retry.addEventListener('click', () => void load());
      banner.append(el('p', { class: 'error' }, ctx.error), retry);
      return;
    }
    if (!ctx.samples.length) {
      banner.append(el('p', {}, 'Pick a project to begin.'));
      return;
    }

    const years = yearsPresent(ctx.samples);
    const visible = filterByYears(ctx.samples, ctx.state.yearFilter);
    if (!visible.length) {
      banner.append(el('p', {}, 'No samples in the selected years.'));
    }
    pieHost.append(
      renderPie(buildPie(ctx.samples, ctx.state.yearFilter), (year) =>
        apply(toggleYear(ctx.state, year, years), false),
      ),
    );
    if (!visible.length) {
      return;
    }
    const model = buildChart(ctx.state, ctx.samples);
    if (ctx.state.chartKind !== 'pie' && ctx.state.chartKind !== 'table') {
      chartHost.append(renderLineChart(model), legend(model));
    }
    tableHost.append(renderTable(buildTable(model, visible)));
  }

  function legend(model: ChartModel): HTMLElement {
    const node = el('div', { class: 'legend' });
    model.series.forEach((series, i) => {
      const item = el('span', { class: 'legend-item' });
      item.append(
        el('i', { style: `background:${COLORS[i % COLORS.length]}` }),
        el('span', {}, `${series.label} (${series.axis})`),
      );
      node.append(item);
    });
    return node;
  }

  function projectPicker(): HTMLElement {
    const row = el('div', { class: 'row' });
    const input = el('input', {
      placeholder: 'project name',
      value: ctx.state.project,
    });
    const go = el('button', {}, 'load');
    go.addEventListener('click', () =>
      apply(setProject(ctx.state, input.value.trim()), true),
    );
    input.addEventListener('keydown', (event) => {
      if (event.key === 'Enter') {
        go.click();
      }
    });
    row.append(el('label', {}, 'project'), input, go);
    return row;
  }

  function choiceRow(
    label: string,
    options: readonly string[],
    active: string,
    onPick: (value: string) => void,
  ): HTMLElement {
    const row = el('div', { class: 'row' });
    row.append(el('label', {}, label));
    for (const option of options) {
      const button = el('button', { class: option === active ? 'active' : '' }, option);
      button.addEventListener('click', () => onPick(option));
      row.append(button);
    }
    return row;
  }

  window.addEventListener('popstate', () => {
    const parsed = parseStateUrl(window.location.pathname, window.location.search);
    if (parsed) {
      ctx.state = parsed;
      void load();
    }
  });

  void load();
}

function trackForm(client: ApiClient): HTMLElement {
  const form = el('form', { id: 'track', class: 'track-form' });
  const owner = el('input', { placeholder: 'owner' });
  const name = el('input', { placeholder: 'name' });
  const branch = el('input', { placeholder: 'branch', value: 'master' });
  const submit = el('button', { type: 'submit' }, 'request tracking');
  const note = el('p', { class: 'note' });
  form.append(el('h2', {}, 'Track a new project'), owner, name, branch, submit, note);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    if (!owner.value.trim() || !name.value.trim() || !branch.value.trim()) {
      note.textContent = 'all three fields are required';
      return;
    }
    client
      .submitTrack(owner.value.trim(), name.value.trim(), branch.value.trim())
      .then(({ record, alreadyRequested }) => {
        note.textContent = alreadyRequested
          ? `already requested: ${record.owner}/${record.name}#${record.branch} is ${record.state}`
          : `request accepted: ${record.owner}/${record.name}#${record.branch} is pending`;
      })
      .catch((err) => {
        note.textContent =
          err instanceof ApiError ? err.payload.detail || err.payload.error : String(err);
      });
  });
  return form;
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  const base = window.REPOPULSE_API_BASE ?? '';
  mount(document.getElementById('app') as HTMLElement, new ApiClient(base));
}
