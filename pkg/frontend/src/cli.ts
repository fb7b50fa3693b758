#!/usr/bin/env node
import { writeFileSync } from "fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { buildPanel, PanelKind } from "./panels.js";
import { DependencyError, Measure, SchemaError } from "./schema.js";

export async function run(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .option("panel", {
      choices: ["curves", "peak-scaling", "collapse"] as const,
      demandOption: true,
      describe: "panel kind",
    })
    .option("input", { type: "string", demandOption: true, describe: "dataset CSV path" })
    .option("fit-report", { type: "string", describe: "fit-report JSON (peak-scaling, collapse)" })
    .option("measure", { choices: ["e1", "e2"] as const, default: "e1" as const })
    .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
    .option("title", { type: "string" })
    .strict()
    .exitProcess(false)
    .fail((msg) => {
      throw new Error(msg);
    })
    .parse();

  const result = buildPanel({
    kind: args.panel as PanelKind,
    inputPath: args.input,
    fitReportPath: args["fit-report"],
    measure: args.measure as Measure,
    title: args.title,
  });
  writeFileSync(args.out, result.svg, "utf-8");
  const check = result.check ? `; ${result.check.name} = ${result.check.value.toExponential(3)}` : "";
  console.log(`wrote ${args.out} (${result.series.length} series${check})`);
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("kondotri-figures")) {
  run(hideBin(process.argv))
    .then((code) => {
      process.exitCode = code;
    })
    .catch((err) => {
      if (err instanceof SchemaError) {
        console.error(`parse error: ${err.message}`);
        process.exitCode = 2;
      } else if (err instanceof DependencyError) {
        console.error(`dependency error: ${err.message}`);
        process.exitCode = 3;
      } else {
        console.error(`error: ${(err as Error).message}`);
        process.exitCode = 1;
      }
    });
}
