#!/usr/bin/env node
/** Command-line entry points: convert, train, verify. */

import { readFileSync, writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { saveBundle, trainReference } from "./bundle.js";
import { convertFile, csvToDataset } from "./convert.js";
import { loadMapping } from "./mapping.js";
import { verifyParityFiles } from "./parity.js";
import { IngestError } from "./types.js";

export async function main(argv: string[]): Promise<number> {
  try {
    await yargs(argv)
      .scriptName("dataset-ingest")
      .command(
        "convert <input> <output>",
        "convert a mapped flow CSV into a labeled dataset CSV",
        (y) =>
          y
            .positional("input", { type: "string", demandOption: true })
            .positional("output", { type: "string", demandOption: true })
            .option("mapping", { type: "string", demandOption: true }),
        (args) => {
          const mapping = loadMapping(args.mapping);
          const result = convertFile(args.input, mapping, args.output);
          console.log(
            `wrote ${result.dataset.features.length} rows to ${args.output} ` +
              `(${result.droppedRows} non-finite rows dropped)`,
          );
        },
      )
      .command(
        "train <dataset> <bundle>",
        "train the reference ensemble and export a model bundle",
        (y) =>
          y
            .positional("dataset", { type: "string", demandOption: true })
            .positional("bundle", { type: "string", demandOption: true })
            .option("n", { type: "number", default: 3 })
            .option("depth", { type: "number", default: 7 })
            .option("ratio", { type: "number", default: 0.33 })
            .option("seed", { type: "number", demandOption: true }),
        (args) => {
          const dataset = csvToDataset(readFileSync(args.dataset, "utf-8"));
          const bundle = trainReference(dataset, {
            nLearners: args.n,
            maxDepth: args.depth,
            subsampleRatio: args.ratio,
            seed: args.seed,
          });
          saveBundle(bundle, args.bundle);
          console.log(`wrote bundle with ${bundle.n_learners} weak learners to ${args.bundle}`);
        },
      )
      .command(
        "verify <bundle> <dataset> <predictions>",
        "compare this trainer's predictions against the primary CLI's output",
        (y) =>
          y
            .positional("bundle", { type: "string", demandOption: true })
            .positional("dataset", { type: "string", demandOption: true })
            .positional("predictions", { type: "string", demandOption: true })
            .option("report", { type: "string", describe: "write the JSON report here" }),
        (args) => {
          const report = verifyParityFiles(args.bundle, args.dataset, args.predictions);
          if (args.report) {
            writeFileSync(args.report, JSON.stringify(report, null, 1) + "\n");
          }
          console.log(`${report.rows} rows, ${report.mismatches} mismatches`);
          if (report.mismatches > 0) {
            throw new IngestError(`parity failed on rows ${report.mismatchedRows.slice(0, 10)}`);
          }
        },
      )
      .demandCommand(1)
      .strict()
      .fail((msg, err) => {
        throw err ?? new IngestError(msg ?? "bad usage");
      })
      .parseAsync();
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => process.exit(code));
}
