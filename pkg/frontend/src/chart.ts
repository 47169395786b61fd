/** Chart models: the data structures the renderer draws from.
 *
 * Every model keeps its plotted values as raw payload numbers so tests
 * (and the data table) can read exactly what is on screen without
 * touching pixels. The renderer only maps these structures to SVG.
 */

import type { DashboardState } from './state.js';
import { selectedSeries } from './state.js';
import type { SeriesField } from './series.js';
import { SERIES_LABELS, fieldValues, filterByYears, yearCounts } from './series.js';
import type { WireSample } from './wire.js';

export type AxisSide = 'left' | 'right';

export interface Axis {
  side: AxisSide;
  label: string;
  min: number;
  max: number;
  ticks: number[];
}

export interface PlottedPoint {
  /** Window start instant, exactly as served. */
  x: string;
  /** Payload value; null renders as a gap. */
  y: number | null;
}

export interface PlottedSeries {
  field: SeriesField;
  label: string;
  axis: AxisSide;
  points: PlottedPoint[];
}

export interface ChartModel {
  kind: 'line' | 'bar';
  labels: string[];
  series: PlottedSeries[];
  left: Axis;
  right: Axis | null;
}

export interface PieSlice {
  year: number;
  count: number;
  fraction: number;
  selected: boolean;
}

export interface TableModel {
  columns: string[];
  rows: (string | number | null)[][];
}

const TICK_COUNT = 5;

function buildAxis(side: AxisSide, label: string, values: (number | null)[]): Axis {
  const present = values.filter((v): v is number => v !== null);
  let min = present.length ? Math.min(...present) : 0;
  let max = present.length ? Math.max(...present) : 1;
  if (min === max) {
    // A flat series still needs a visible band around it.
    min -= 0.5;
    max += 0.5;
  }
  const ticks = [];
  for (let i = 0; i <= TICK_COUNT; i++) {
    ticks.push(min + ((max - min) * i) / TICK_COUNT);
  }
  return { side, label, min, max, ticks };
}

function plotted(
  samples: readonly WireSample[],
  field: SeriesField,
  axis: AxisSide,
): PlottedSeries {
  const values = fieldValues(samples, field);
  return {
    field,
    label: SERIES_LABELS[field],
    axis,
    points: samples.map((s, i) => ({ x: s.start_date, y: values[i] })),
  };
}

/**
 * The chart for a state, computed over the year-filtered samples.
 * Dual mode puts the second series (kloc) on its own right axis since
 * density and KLOC differ by orders of magnitude; multi mode shares a
 * left axis for the four issue counters and keeps density readable on
 * the right.
 */
export function buildChart(
  state: DashboardState,
  samples: readonly WireSample[],
): ChartModel {
  const visible = filterByYears(samples, state.yearFilter);
  const fields = selectedSeries(state) as SeriesField[];
  const sides: AxisSide[] =
    state.comparison === 'single'
      ? fields.map(() => 'left')
      : fields.map((_, i) => (i === fields.length - 1 ? 'right' : 'left'));
  const series = fields.map((field, i) => plotted(visible, field, sides[i]));

  const axisValues = (side: AxisSide) =>
    series.filter((s) => s.axis === side).flatMap((s) => s.points.map((p) => p.y));
  const leftLabel = series
    .filter((s) => s.axis === 'left')
    .map((s) => s.label)
    .join(' / ');
  const rightSeries = series.filter((s) => s.axis === 'right');
  return {
    kind: state.chartKind === 'bar' ? 'bar' : 'line',
    labels: visible.map((s) => s.start_date),
    series,
    left: buildAxis('left', leftLabel, axisValues('left')),
    right: rightSeries.length
      ? buildAxis('right', rightSeries.map((s) => s.label).join(' / '), axisValues('right'))
      : null,
  };
}

/** Pie of sample counts per year; the filter highlights slices. */
export function buildPie(
  samples: readonly WireSample[],
  yearFilter: readonly number[],
): PieSlice[] {
  const counts = yearCounts(samples);
  const total = samples.length;
  const selected = new Set(yearFilter);
  return [...counts.entries()].map(([year, count]) => ({
    year,
    count,
    fraction: total ? count / total : 0,
    selected: selected.has(year),
  }));
}

/**
 * The data table for a chart: one row per plotted label, one column
 * per plotted series, values identical to the chart's points.
 */
export function buildTable(model: ChartModel, visible: readonly WireSample[]): TableModel {
  const columns = ['start_date', 'end_date', ...model.series.map((s) => s.label)];
  const rows = model.labels.map((label, i) => [
    label,
    visible[i].end_date,
    ...model.series.map((s) => s.points[i].y),
  ]);
  return { columns, rows };
}
