/** Reference ensemble training and the portable model bundle. */

import { readFileSync, writeFileSync } from "node:fs";
import { predictTree, trainTree, treeDepth } from "./tree.js";
import {
  BUNDLE_FORMAT_VERSION,
  IngestError,
  LabeledDataset,
  ModelBundle,
  TreeNode,
  VOTE_RULE,
  WeakLearnerJson,
} from "./types.js";

/** Half-up rounding of ratio * featureCount, matching the primary trainer. */
export function subsetSize(featureCount: number, ratio: number): number {
  return Math.floor(ratio * featureCount + 0.5);
}

/** Deterministic PRNG (mulberry32) so training is reproducible per seed. */
export function makeRng(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function sampleSubset(rng: () => number, featureCount: number, k: number): number[] {
  const pool = Array.from({ length: featureCount }, (_, i) => i);
  for (let i = pool.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [pool[i], pool[j]] = [pool[j], pool[i]];
  }
  return pool.slice(0, k).sort((a, b) => a - b);
}

export interface TrainOptions {
  nLearners?: number;
  subsampleRatio?: number;
  maxDepth?: number;
  seed: number;
}

export function trainReference(dataset: LabeledDataset, opts: TrainOptions): ModelBundle {
  const { nLearners = 3, subsampleRatio = 0.33, maxDepth = 7, seed } = opts;
  if (dataset.features.length === 0) throw new IngestError("empty dataset");
  const featureCount = dataset.features[0].length;
  const k = subsetSize(featureCount, subsampleRatio);
  if (k < 1) throw new IngestError("subsample ratio selects zero features");
  const learners: WeakLearnerJson[] = [];
  for (let wlId = 0; wlId < nLearners; wlId++) {
    const rng = makeRng(seed * 1000003 + wlId);
    const subset = sampleSubset(rng, featureCount, k);
    const projected = dataset.features.map((row) => subset.map((i) => row[i]));
    const nodes = trainTree(projected, dataset.labels, maxDepth);
    learners.push({ wl_id: wlId, feature_subset: subset, max_depth: maxDepth, nodes });
  }
  const bundle: ModelBundle = {
    format_version: BUNDLE_FORMAT_VERSION,
    feature_count: featureCount,
    n_learners: nLearners,
    vote_rule: VOTE_RULE,
    learners,
  };
  validateBundle(bundle);
  return bundle;
}

/** Schema checks mirroring the primary loader; fails before any file write. */
export function validateBundle(bundle: ModelBundle): void {
  if (bundle.format_version !== BUNDLE_FORMAT_VERSION) {
    throw new IngestError(`unsupported format_version ${bundle.format_version}`);
  }
  if (bundle.learners.length !== bundle.n_learners) {
    throw new IngestError("n_learners disagrees with learner list");
  }
  bundle.learners.forEach((wl, slot) => {
    if (wl.wl_id !== slot) {
      throw new IngestError(`wl_id ${wl.wl_id} out of order (expected ${slot})`);
    }
    const sorted = [...new Set(wl.feature_subset)].sort((a, b) => a - b);
    if (sorted.length !== wl.feature_subset.length ||
        !sorted.every((v, i) => v === wl.feature_subset[i])) {
      throw new IngestError("feature subset must be sorted and distinct");
    }
    for (const i of wl.feature_subset) {
      if (!Number.isInteger(i) || i < 0 || i >= bundle.feature_count) {
        throw new IngestError(`feature index ${i} out of range`);
      }
    }
    validateTree(wl.nodes, wl.feature_subset.length, wl.max_depth);
  });
}

function validateTree(nodes: TreeNode[], width: number, maxDepth: number): void {
  if (nodes.length === 0) throw new IngestError("tree has no nodes");
  const seen = new Set<number>();
  const walk = (at: number, depth: number): void => {
    if (at < 0 || at >= nodes.length) throw new IngestError("child index out of range");
    if (seen.has(at)) throw new IngestError("node reachable twice");
    seen.add(at);
    const node = nodes[at];
    if ("leaf" in node) {
      if (node.leaf !== 0 && node.leaf !== 1) {
        throw new IngestError(`leaf class must be 0/1, got ${node.leaf}`);
      }
      return;
    }
    if (node.f < 0 || node.f >= width) throw new IngestError(`feature index ${node.f} out of range`);
    if (!Number.isFinite(node.t)) throw new IngestError("non-finite threshold");
    if (depth + 1 > maxDepth) throw new IngestError("tree deeper than declared max_depth");
    walk(node.l, depth + 1);
    walk(node.r, depth + 1);
  };
  walk(0, 0);
  if (seen.size !== nodes.length) throw new IngestError("unreachable nodes in tree array");
  if (treeDepth(nodes) > maxDepth) throw new IngestError("tree deeper than declared max_depth");
}

export function predictMajority(bundle: ModelBundle, features: number[]): number {
  if (features.length !== bundle.feature_count) {
    throw new IngestError(
      `expected ${bundle.feature_count} features, got ${features.length}`,
    );
  }
  let votes = 0;
  for (const wl of bundle.learners) {
    votes += predictTree(wl.nodes, wl.feature_subset.map((i) => features[i]));
  }
  return 2 * votes >= bundle.n_learners ? 1 : 0;
}

export function saveBundle(bundle: ModelBundle, path: string): void {
  validateBundle(bundle);
  // JSON.stringify already emits shortest round-trip decimals for thresholds
  writeFileSync(path, JSON.stringify(bundle, null, 1) + "\n");
}

export function loadBundle(path: string): ModelBundle {
  const bundle = JSON.parse(readFileSync(path, "utf-8")) as ModelBundle;
  validateBundle(bundle);
  return bundle;
}
