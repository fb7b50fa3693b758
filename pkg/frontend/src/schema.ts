import { z } from "zod";

/** One row of the sweep dataset CSV (the solver's exchange format). */
export interface DatasetRow {
  model: string;
  j_prime: number;
  control: number;
  n_total: number;
  energy: number;
  e1: number;
  e2: number;
  pi_a: number;
  pi_b: number;
  pi_c: number;
  n_a_bc: number;
  n_b_ac: number;
  n_c_ab: number;
  n_ab: number;
  n_ac: number;
  n_bc: number;
  converged: boolean;
}

export const DATASET_COLUMNS = [
  "model", "j_prime", "control", "n_total", "energy",
  "e1", "e2", "pi_a", "pi_b", "pi_c",
  "n_a_bc", "n_b_ac", "n_c_ab", "n_ab", "n_ac", "n_bc",
  "converged",
] as const;

/** Fit-report JSON emitted by the solver's fit modes. */
export const FitReportSchema = z.object({
  measure: z.string(),
  model: z.string(),
  mode: z.string(),
  nu: z.number().nullable(),
  beta: z.number().nullable(),
  lambda: z.number().nullable(),
  g_c: z.number().nullable(),
  quality: z.number().nullable(),
  residuals: z.record(z.number()),
  identity_residual: z.number().nullable(),
  settings: z.record(z.unknown()),
});

export type FitReport = z.infer<typeof FitReportSchema>;

export type Measure = "e1" | "e2";

export class SchemaError extends Error {}
export class DependencyError extends Error {}
