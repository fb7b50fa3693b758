import { DatasetRow, DependencyError, FitReport, Measure, SchemaError } from "./schema.js";

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

function usable(rows: DatasetRow[], measure: Measure): DatasetRow[] {
  return rows.filter((r) => r.converged && Number.isFinite(r[measure]));
}

function sizes(rows: DatasetRow[]): number[] {
  return [...new Set(rows.map((r) => r.n_total))].sort((a, b) => a - b);
}

function bySize(rows: DatasetRow[], n: number): DatasetRow[] {
  return rows.filter((r) => r.n_total === n).sort((a, b) => a.control - b.control);
}

/** One measure-vs-control series per system size. */
export function curveSeries(rows: DatasetRow[], measure: Measure): Series[] {
  const good = usable(rows, measure);
  if (good.length === 0) throw new SchemaError(`no usable rows for measure ${measure}`);
  return sizes(good).map((n) => {
    const pts = bySize(good, n);
    return {
      label: `N = ${n}`,
      x: pts.map((r) => r.control),
      y: pts.map((r) => r[measure]),
    };
  });
}

function interpolate(x: number[], y: number[], xq: number): number {
  if (xq <= x[0]) return y[0];
  if (xq >= x[x.length - 1]) return y[y.length - 1];
  let i = 1;
  while (x[i] < xq) i++;
  const t = (xq - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + t * (y[i] - y[i - 1]);
}

/**
 * Peak-scaling points: the measure at the critical control value, one point
 * per size, plotted against N^lambda so a power law reads as a straight line.
 * lambda and g_c come from a fit report, never recomputed here.
 */
export function peakScalingSeries(
  rows: DatasetRow[],
  measure: Measure,
  report: FitReport,
): Series {
  if (report.lambda === null || report.g_c === null) {
    throw new DependencyError("peak-scaling panel needs a fit report with lambda and g_c");
  }
  const good = usable(rows, measure);
  const pts = sizes(good).map((n) => {
    const curve = bySize(good, n);
    const value = interpolate(
      curve.map((r) => r.control),
      curve.map((r) => r[measure]),
      report.g_c as number,
    );
    return { x: Math.pow(n, report.lambda as number), y: value };
  });
  return {
    label: `${measure}(g_c) vs N^${report.lambda}`,
    x: pts.map((p) => p.x),
    y: pts.map((p) => p.y),
  };
}

/** Rescaled master curves: y = N^(-beta/nu) E against x = N^(1/nu) |g - g_c|. */
export function collapseSeries(
  rows: DatasetRow[],
  measure: Measure,
  report: FitReport,
): Series[] {
  if (report.nu === null || report.beta === null || report.g_c === null) {
    throw new DependencyError("collapse panel needs a fit report with nu, beta, and g_c");
  }
  const nu = report.nu;
  const beta = report.beta;
  const gc = report.g_c;
  const good = usable(rows, measure);
  if (good.length === 0) throw new SchemaError(`no usable rows for measure ${measure}`);
  return sizes(good).map((n) => {
    const pts = bySize(good, n)
      .map((r) => ({
        x: Math.pow(n, 1 / nu) * Math.abs(r.control - gc),
        y: Math.pow(n, -beta / nu) * r[measure],
      }))
      .sort((a, b) => a.x - b.x || a.y - b.y);
    return { label: `N = ${n}`, x: pts.map((p) => p.x), y: pts.map((p) => p.y) };
  });
}

/** RMS residual of the best straight line through a single series. */
export function linearFitResidual(series: Series): number {
  const n = series.x.length;
  const mx = series.x.reduce((a, b) => a + b, 0) / n;
  const my = series.y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (series.x[i] - mx) ** 2;
    sxy += (series.x[i] - mx) * (series.y[i] - my);
  }
  const slope = sxx > 0 ? sxy / sxx : 0;
  let ss = 0;
  for (let i = 0; i < n; i++) {
    const pred = my + slope * (series.x[i] - mx);
    ss += (series.y[i] - pred) ** 2;
  }
  return Math.sqrt(ss / n);
}

/**
 * Largest vertical gap between any two rescaled curves over their shared
 * x-range; zero means the series overlap into one master curve.
 */
export function collapseDeviation(series: Series[]): number {
  let worst = 0;
  for (let i = 0; i < series.length; i++) {
    for (let j = 0; j < series.length; j++) {
      if (i === j || series[j].x.length < 2) continue;
      const lo = series[j].x[0];
      const hi = series[j].x[series[j].x.length - 1];
      for (let k = 0; k < series[i].x.length; k++) {
        const xq = series[i].x[k];
        if (xq < lo || xq > hi) continue;
        const gap = Math.abs(series[i].y[k] - interpolate(series[j].x, series[j].y, xq));
        if (gap > worst) worst = gap;
      }
    }
  }
  return worst;
}
