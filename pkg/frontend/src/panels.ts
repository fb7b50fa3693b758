import { readDataset, readFitReport } from "./csv.js";
import { DependencyError, Measure } from "./schema.js";
import {
  collapseDeviation,
  collapseSeries,
  curveSeries,
  linearFitResidual,
  peakScalingSeries,
  Series,
} from "./transforms.js";
import { renderSvg } from "./svg.js";

export type PanelKind = "curves" | "peak-scaling" | "collapse";

export interface PanelSpec {
  kind: PanelKind;
  inputPath: string;
  fitReportPath?: string;
  measure: Measure;
  title?: string;
}

export interface RenderResult {
  svg: string;
  series: Series[];
  /** plot-side diagnostics: linear-fit residual / master-curve deviation */
  check?: { name: string; value: number };
}

const MEASURE_LABEL: Record<Measure, string> = { e1: "E1", e2: "E2" };

export function buildPanel(spec: PanelSpec): RenderResult {
  const rows = readDataset(spec.inputPath);
  const label = MEASURE_LABEL[spec.measure];

  if (spec.kind === "curves") {
    const series = curveSeries(rows, spec.measure);
    const svg = renderSvg(series, {
      title: spec.title ?? `${label} across the transition`,
      xLabel: "control parameter g",
      yLabel: label,
    });
    return { svg, series };
  }

  if (spec.fitReportPath === undefined) {
    throw new DependencyError(`${spec.kind} panel needs --fit-report`);
  }
  const report = readFitReport(spec.fitReportPath);

  if (spec.kind === "peak-scaling") {
    const series = peakScalingSeries(rows, spec.measure, report);
    const svg = renderSvg([series], {
      title: spec.title ?? `${label}(g_c) peak scaling`,
      xLabel: `N^${report.lambda}`,
      yLabel: `${label}(g_c)`,
      markersOnly: false,
    });
    return {
      svg,
      series: [series],
      check: { name: "linear_fit_residual", value: linearFitResidual(series) },
    };
  }

  const series = collapseSeries(rows, spec.measure, report);
  const svg = renderSvg(series, {
    title: spec.title ?? `${label} data collapse (nu=${report.nu}, beta=${report.beta})`,
    xLabel: `N^(1/${report.nu}) |g - g_c|`,
    yLabel: `N^(-${report.beta}/${report.nu}) ${label}`,
  });
  return {
    svg,
    series,
    check: { name: "max_rescaled_deviation", value: collapseDeviation(series) },
  };
}
