/** Column mapping: how a public flow CSV maps onto the labeled dataset. */

import { readFileSync } from "node:fs";
import { IngestError } from "./types.js";

export interface ColumnMapping {
  /** source column name -> dense feature index */
  features: Record<string, number>;
  /** the (single) source column carrying the class label */
  labelColumn: string;
  /** label value -> 0/1; lookup is case-insensitive on trimmed values */
  labelMap: Record<string, number>;
}

export function validateMapping(raw: unknown): ColumnMapping {
  const doc = raw as Partial<ColumnMapping> & Record<string, unknown>;
  if (!doc || typeof doc !== "object") {
    throw new IngestError("mapping must be a JSON object");
  }
  const features = doc.features;
  if (!features || typeof features !== "object" || Array.isArray(features)) {
    throw new IngestError("mapping needs a 'features' object");
  }
  const indices = Object.values(features);
  const count = indices.length;
  if (count === 0) {
    throw new IngestError("mapping maps no feature columns");
  }
  const seen = new Set<number>();
  for (const [column, index] of Object.entries(features)) {
    if (!Number.isInteger(index) || index < 0 || index >= count) {
      throw new IngestError(
        `feature index for column '${column}' must be an integer in [0, ${count})`,
      );
    }
    if (seen.has(index)) {
      throw new IngestError(`duplicate feature index ${index} (column '${column}')`);
    }
    seen.add(index);
  }
  if (typeof doc.labelColumn !== "string" || !doc.labelColumn) {
    throw new IngestError("mapping needs exactly one 'labelColumn'");
  }
  if (doc.labelColumn in features) {
    throw new IngestError("the label column cannot also be a feature column");
  }
  const labelMap = doc.labelMap;
  if (!labelMap || typeof labelMap !== "object" || Array.isArray(labelMap)) {
    throw new IngestError("mapping needs a 'labelMap' object");
  }
  const normalized: Record<string, number> = {};
  for (const [name, value] of Object.entries(labelMap)) {
    if (value !== 0 && value !== 1) {
      throw new IngestError(`label '${name}' must map to 0 or 1, got ${value}`);
    }
    normalized[name.trim().toLowerCase()] = value;
  }
  return { features: { ...features }, labelColumn: doc.labelColumn, labelMap: normalized };
}

export function loadMapping(path: string): ColumnMapping {
  return validateMapping(JSON.parse(readFileSync(path, "utf-8")));
}

export function lookupLabel(mapping: ColumnMapping, raw: string): number | undefined {
  return mapping.labelMap[raw.trim().toLowerCase()];
}
