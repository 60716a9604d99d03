/** Cross-implementation conformance against the primary component. */

import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { loadBundle, predictMajority } from "./bundle.js";
import { csvToDataset } from "./convert.js";
import { IngestError, LabeledDataset, ModelBundle, TreeNode } from "./types.js";

export interface ParityReport {
  rows: number;
  mismatches: number;
  mismatchedRows: number[];
}

export function verifyParity(
  bundle: ModelBundle,
  dataset: LabeledDataset,
  primaryPredictions: number[],
): ParityReport {
  if (dataset.features.length === 0) {
    throw new IngestError("empty dataset");
  }
  if (primaryPredictions.length !== dataset.features.length) {
    throw new IngestError(
      `row-count mismatch: dataset has ${dataset.features.length} rows, ` +
        `predictions file has ${primaryPredictions.length}`,
    );
  }
  const mismatchedRows: number[] = [];
  dataset.features.forEach((row, i) => {
    if (predictMajority(bundle, row) !== primaryPredictions[i]) {
      mismatchedRows.push(i);
    }
  });
  return {
    rows: dataset.features.length,
    mismatches: mismatchedRows.length,
    mismatchedRows,
  };
}

/** Reads the primary CLI's `row,prediction` output in row order. */
export function readPredictionsCsv(path: string): number[] {
  const parsed = Papa.parse<string[]>(readFileSync(path, "utf-8").trim(), {
    skipEmptyLines: true,
  });
  const rows = parsed.data;
  const header = rows.shift();
  if (!header || header[0] !== "row" || header[1] !== "prediction") {
    throw new IngestError("predictions CSV must have a 'row,prediction' header");
  }
  return rows
    .map((row) => [Number(row[0]), Number(row[1])] as const)
    .sort((a, b) => a[0] - b[0])
    .map(([, pred]) => pred);
}

export function verifyParityFiles(
  bundlePath: string,
  datasetPath: string,
  predictionsPath: string,
): ParityReport {
  const bundle = loadBundle(bundlePath);
  const dataset = csvToDataset(readFileSync(datasetPath, "utf-8"));
  return verifyParity(bundle, dataset, readPredictionsCsv(predictionsPath));
}

/**
 * A feature row that hits the root threshold of the first split tree
 * exactly — the probe for "<= goes left" traversal agreement.
 */
export function thresholdEqualRow(bundle: ModelBundle, fill = 0): number[] {
  const row = new Array<number>(bundle.feature_count).fill(fill);
  for (const wl of bundle.learners) {
    const root: TreeNode = wl.nodes[0];
    if (!("leaf" in root)) {
      row[wl.feature_subset[root.f]] = root.t;
      return row;
    }
  }
  throw new IngestError("bundle contains no split nodes to probe");
}
