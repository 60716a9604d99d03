import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";
import {
  loadBundle,
  makeRng,
  predictMajority,
  saveBundle,
  trainReference,
  validateBundle,
} from "../src/bundle.js";
import { treeDepth } from "../src/tree.js";
import type { LabeledDataset, ModelBundle } from "../src/types.js";

const tmp = mkdtempSync(join(tmpdir(), "ingest-"));
afterAll(() => rmSync(tmp, { recursive: true, force: true }));

function syntheticDataset(rows: number, width: number, seed: number): LabeledDataset {
  const rng = makeRng(seed);
  const features: number[][] = [];
  const labels: number[] = [];
  for (let i = 0; i < rows; i++) {
    const label = i % 2;
    features.push(Array.from({ length: width }, () => rng() * 4 + label * 2));
    labels.push(label);
  }
  return { features, labels };
}

describe("trainReference", () => {
  const dataset = syntheticDataset(400, 72, 1);
  const bundle = trainReference(dataset, { seed: 1 });

  it("follows the decomposition rules", () => {
    expect(bundle.format_version).toBe(1);
    expect(bundle.n_learners).toBe(3);
    expect(bundle.vote_rule).toBe("majority-tie-malicious");
    for (const wl of bundle.learners) {
      expect(wl.feature_subset).toHaveLength(24); // round(0.33 * 72)
      expect(wl.max_depth).toBe(7);
      expect(treeDepth(wl.nodes)).toBeLessThanOrEqual(7);
    }
  });

  it("is deterministic per seed", () => {
    expect(trainReference(dataset, { seed: 1 })).toEqual(bundle);
    expect(trainReference(dataset, { seed: 2 })).not.toEqual(bundle);
  });

  it("separates the synthetic classes", () => {
    const holdout = syntheticDataset(200, 72, 9);
    let correct = 0;
    holdout.features.forEach((row, i) => {
      correct += predictMajority(bundle, row) === holdout.labels[i] ? 1 : 0;
    });
    expect(correct / holdout.features.length).toBeGreaterThan(0.9);
  });

  it("round-trips through the bundle file", () => {
    const path = join(tmp, "bundle.json");
    saveBundle(bundle, path);
    const loaded = loadBundle(path);
    expect(loaded).toEqual(bundle);
    const row = syntheticDataset(1, 72, 3).features[0];
    expect(predictMajority(loaded, row)).toBe(predictMajority(bundle, row));
  });
});

describe("validateBundle", () => {
  const base = trainReference(syntheticDataset(100, 6, 4), {
    seed: 4,
    subsampleRatio: 0.5,
  });

  function mutated(mutate: (b: ModelBundle) => void): ModelBundle {
    const copy = JSON.parse(JSON.stringify(base)) as ModelBundle;
    mutate(copy);
    return copy;
  }

  it("accepts its own output", () => {
    expect(() => validateBundle(base)).not.toThrow();
  });

  it.each<[string, (b: ModelBundle) => void]>([
    ["bad version", (b) => { b.format_version = 2; }],
    ["learner count mismatch", (b) => { b.n_learners = 5; }],
    ["unsorted subset", (b) => { b.learners[0].feature_subset.reverse(); }],
    ["subset out of range", (b) => { b.learners[0].feature_subset[0] = 99; }],
    ["dangling child index", (b) => {
      const node = b.learners[0].nodes[0];
      if ("r" in node) node.r = 999;
    }],
    ["wl_id out of order", (b) => { b.learners[0].wl_id = 2; }],
  ])("rejects %s", (_name, mutate) => {
    expect(() => validateBundle(mutated(mutate))).toThrow();
  });
});

describe("predictMajority", () => {
  it("checks the feature-vector width", () => {
    const bundle = trainReference(syntheticDataset(50, 4, 5), {
      seed: 5,
      subsampleRatio: 0.5,
    });
    expect(() => predictMajority(bundle, [1, 2])).toThrow(/expected 4 features/);
  });
});
