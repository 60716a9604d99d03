/** Conversion of mapped flow CSVs into the labeled-dataset CSV format. */

import { readFileSync, writeFileSync } from "node:fs";
import Papa from "papaparse";
import { ColumnMapping, lookupLabel } from "./mapping.js";
import { IngestError, LabeledDataset } from "./types.js";

export interface ConvertResult {
  dataset: LabeledDataset;
  /** rows discarded because a mapped feature value was not finite */
  droppedRows: number;
}

export function convertRows(
  rows: Record<string, string>[],
  mapping: ColumnMapping,
): ConvertResult {
  const count = Object.keys(mapping.features).length;
  if (rows.length === 0) {
    throw new IngestError("input CSV has no data rows");
  }
  for (const column of [...Object.keys(mapping.features), mapping.labelColumn]) {
    if (!(column in rows[0])) {
      throw new IngestError(`mapped column '${column}' missing from input CSV`);
    }
  }
  const features: number[][] = [];
  const labels: number[] = [];
  let droppedRows = 0;
  for (const row of rows) {
    const label = lookupLabel(mapping, row[mapping.labelColumn]);
    if (label === undefined) {
      throw new IngestError(
        `unmapped label value '${row[mapping.labelColumn]}' in column '${mapping.labelColumn}'`,
      );
    }
    const vec = new Array<number>(count);
    let finite = true;
    for (const [column, index] of Object.entries(mapping.features)) {
      const value = Number(row[column]);
      if (!Number.isFinite(value)) {
        finite = false;
        break;
      }
      vec[index] = value;
    }
    if (!finite) {
      droppedRows += 1;
      continue;
    }
    features.push(vec);
    labels.push(label);
  }
  return { dataset: { features, labels }, droppedRows };
}

export function convertCsv(content: string, mapping: ColumnMapping): ConvertResult {
  const parsed = Papa.parse<Record<string, string>>(content, {
    header: true,
    skipEmptyLines: true,
    transformHeader: (h) => h.trim(),
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new IngestError(`CSV parse error at row ${first.row}: ${first.message}`);
  }
  return convertRows(parsed.data, mapping);
}

/** Dataset CSV layout shared with the primary component: f0..fN-1,label. */
export function datasetToCsv(dataset: LabeledDataset): string {
  const width = dataset.features[0]?.length ?? 0;
  const header = [...Array.from({ length: width }, (_, i) => `f${i}`), "label"];
  const lines = [header.join(",")];
  dataset.features.forEach((row, i) => {
    lines.push([...row.map((v) => String(v)), String(dataset.labels[i])].join(","));
  });
  return lines.join("\n") + "\n";
}

export function csvToDataset(content: string): LabeledDataset {
  const parsed = Papa.parse<string[]>(content.trim(), { skipEmptyLines: true });
  const rows = parsed.data;
  const header = rows.shift();
  if (!header || header[header.length - 1] !== "label") {
    throw new IngestError("dataset CSV must end with a 'label' column");
  }
  if (rows.length === 0) {
    throw new IngestError("empty dataset file");
  }
  const features = rows.map((row) => row.slice(0, -1).map(Number));
  const labels = rows.map((row) => Number(row[row.length - 1]));
  return { features, labels };
}

export function convertFile(
  inPath: string,
  mapping: ColumnMapping,
  outPath: string,
): ConvertResult {
  const result = convertCsv(readFileSync(inPath, "utf-8"), mapping);
  writeFileSync(outPath, datasetToCsv(result.dataset));
  return result;
}
