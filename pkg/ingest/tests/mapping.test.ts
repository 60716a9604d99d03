import { describe, expect, it } from "vitest";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { loadMapping, lookupLabel, validateMapping } from "../src/mapping.js";

const here = dirname(fileURLToPath(import.meta.url));

const valid = {
  features: { colA: 0, colB: 1 },
  labelColumn: "Label",
  labelMap: { Benign: 0, Attack: 1 },
};

describe("validateMapping", () => {
  it("accepts a well-formed mapping", () => {
    const mapping = validateMapping(valid);
    expect(Object.keys(mapping.features)).toHaveLength(2);
    expect(mapping.labelColumn).toBe("Label");
  });

  it("rejects duplicate feature indices", () => {
    expect(() =>
      validateMapping({ ...valid, features: { colA: 0, colB: 0 } }),
    ).toThrow(/duplicate feature index 0/);
  });

  it("rejects sparse feature indices", () => {
    expect(() =>
      validateMapping({ ...valid, features: { colA: 0, colB: 5 } }),
    ).toThrow(/must be an integer in \[0, 2\)/);
  });

  it("requires a label column", () => {
    expect(() => validateMapping({ ...valid, labelColumn: undefined })).toThrow(
      /exactly one 'labelColumn'/,
    );
  });

  it("rejects a label column that is also a feature", () => {
    expect(() => validateMapping({ ...valid, labelColumn: "colA" })).toThrow(
      /cannot also be a feature/,
    );
  });

  it("rejects label values outside {0,1}", () => {
    expect(() =>
      validateMapping({ ...valid, labelMap: { Benign: 2 } }),
    ).toThrow(/must map to 0 or 1/);
  });

  it("looks labels up case-insensitively", () => {
    const mapping = validateMapping(valid);
    expect(lookupLabel(mapping, "  BENIGN ")).toBe(0);
    expect(lookupLabel(mapping, "attack")).toBe(1);
    expect(lookupLabel(mapping, "unknown")).toBeUndefined();
  });
});

describe("shipped CIC mapping", () => {
  it("maps 72 distinct feature columns", () => {
    const mapping = loadMapping(join(here, "..", "data", "cic_ids_2018.json"));
    const indices = Object.values(mapping.features);
    expect(indices).toHaveLength(72);
    expect(new Set(indices).size).toBe(72);
    expect(lookupLabel(mapping, "Benign")).toBe(0);
    expect(lookupLabel(mapping, "DoS attacks-Hulk")).toBe(1);
  });
});
