import Papa from "papaparse";
import { readFileSync } from "fs";

import { DATASET_COLUMNS, DatasetRow, FitReport, FitReportSchema, SchemaError } from "./schema.js";

/** Parse dataset CSV text, enforcing the exact documented header. */
export function parseDataset(text: string, source = "<string>"): DatasetRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${source}: ${e.message} (row ${e.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (let i = 0; i < DATASET_COLUMNS.length; i++) {
    if (fields[i] !== DATASET_COLUMNS[i]) {
      throw new SchemaError(
        `${source}: header field ${JSON.stringify(fields[i])} where '${DATASET_COLUMNS[i]}' expected`,
      );
    }
  }
  if (fields.length !== DATASET_COLUMNS.length) {
    throw new SchemaError(`${source}: header has ${fields.length} columns, schema has ${DATASET_COLUMNS.length}`);
  }
  return parsed.data.map((raw, i) => {
    const lineno = i + 2;
    const num = (name: string): number => {
      const value = Number(raw[name]);
      if (Number.isNaN(value) && raw[name]?.toLowerCase() !== "nan") {
        throw new SchemaError(`${source}:${lineno}: field '${name}' is not a number: ${raw[name]}`);
      }
      return value;
    };
    const conv = raw["converged"]?.toLowerCase();
    if (conv !== "true" && conv !== "false") {
      throw new SchemaError(`${source}:${lineno}: converged must be true/false, got ${raw["converged"]}`);
    }
    if (raw["model"] !== "2ikm" && raw["model"] !== "2ckm") {
      throw new SchemaError(`${source}:${lineno}: unknown model ${raw["model"]}`);
    }
    return {
      model: raw["model"],
      j_prime: num("j_prime"),
      control: num("control"),
      n_total: num("n_total"),
      energy: num("energy"),
      e1: num("e1"),
      e2: num("e2"),
      pi_a: num("pi_a"),
      pi_b: num("pi_b"),
      pi_c: num("pi_c"),
      n_a_bc: num("n_a_bc"),
      n_b_ac: num("n_b_ac"),
      n_c_ab: num("n_c_ab"),
      n_ab: num("n_ab"),
      n_ac: num("n_ac"),
      n_bc: num("n_bc"),
      converged: conv === "true",
    };
  });
}

export function readDataset(path: string): DatasetRow[] {
  return parseDataset(readFileSync(path, "utf-8"), path);
}

export function readFitReport(path: string): FitReport {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new SchemaError(`${path}: not valid JSON (${(err as Error).message})`);
  }
  const result = FitReportSchema.safeParse(raw);
  if (!result.success) {
    const issue = result.error.issues[0];
    throw new SchemaError(`${path}: ${issue.path.join(".")}: ${issue.message}`);
  }
  return result.data;
}
