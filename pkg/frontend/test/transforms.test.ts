import { describe, expect, it } from "vitest";
import { readFileSync } from "fs";
import { fileURLToPath } from "url";
import path from "path";

import { parseDataset, readDataset, readFitReport } from "../src/csv.js";
import { SchemaError } from "../src/schema.js";
import {
  collapseDeviation,
  collapseSeries,
  curveSeries,
  linearFitResidual,
  peakScalingSeries,
} from "../src/transforms.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const fixture = (name: string) => path.join(here, "fixtures", name);

describe("dataset parsing", () => {
  it("parses the solver CSV schema", () => {
    const rows = readDataset(fixture("sweep_small.csv"));
    expect(rows.length).toBe(20);
    expect(rows[0].model).toBe("2ikm");
    expect(rows.every((r) => r.converged)).toBe(true);
    expect(Number.isNaN(rows[0].e2)).toBe(true); // e1-only sweep
  });

  it("rejects a wrong header naming the first bad field", () => {
    const text = readFileSync(fixture("sweep_small.csv"), "utf-8").replace("e1,e2", "e2,e1");
    expect(() => parseDataset(text)).toThrowError(SchemaError);
    expect(() => parseDataset(text)).toThrowError(/'e1' expected/);
  });

  it("rejects bad cell values with line numbers", () => {
    const lines = readFileSync(fixture("sweep_small.csv"), "utf-8").trim().split("\n");
    lines[3] = lines[3].replace("2ikm", "4ikm");
    expect(() => parseDataset(lines.join("\n"))).toThrowError(/:4:/);
  });

  it("validates fit reports", () => {
    const report = readFitReport(fixture("collapse_report.json"));
    expect(report.nu).toBeCloseTo(2.0, 3);
    expect(report.beta).toBeCloseTo(0.38, 3);
    expect(() => readFitReport(fixture("sweep_small.csv"))).toThrowError(SchemaError);
  });
});

describe("panel transforms", () => {
  it("builds one curve per size", () => {
    const rows = readDataset(fixture("sweep_small.csv"));
    const series = curveSeries(rows, "e1");
    expect(series.map((s) => s.label)).toEqual(["N = 8", "N = 12"]);
    expect(series[0].x.length).toBe(10);
    // controls ascend within each curve
    for (const s of series) {
      for (let i = 1; i < s.x.length; i++) expect(s.x[i]).toBeGreaterThan(s.x[i - 1]);
    }
  });

  it("peak-scaling points are collinear on exact power-law data", () => {
    const rows = readDataset(fixture("ansatz_exact.csv"));
    const report = readFitReport(fixture("power_report.json"));
    const series = peakScalingSeries(rows, "e1", report);
    expect(series.x.length).toBe(4);
    expect(linearFitResidual(series)).toBeLessThanOrEqual(1e-10);
  });

  it("rescaled collapse series overlap on exact data", () => {
    const rows = readDataset(fixture("collapse_exact.csv"));
    const report = readFitReport(fixture("collapse_report.json"));
    const series = collapseSeries(rows, "e1", report);
    expect(series.length).toBe(4);
    expect(collapseDeviation(series)).toBeLessThanOrEqual(1e-10);
  });

  it("linear fit residual detects curvature", () => {
    const bent = { label: "", x: [1, 2, 3, 4], y: [1, 4, 9, 16] };
    expect(linearFitResidual(bent)).toBeGreaterThan(0.1);
  });
});
