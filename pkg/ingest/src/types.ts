/** Shared shapes for the ingest pipeline and the portable model bundle. */

export interface LabeledDataset {
  /** row-major feature matrix */
  features: number[][];
  /** 0 = benign, 1 = malicious, aligned with features */
  labels: number[];
}

/** Flat pre-order tree node: either an internal split or a leaf class. */
export type TreeNode =
  | { f: number; t: number; l: number; r: number }
  | { leaf: number };

export interface WeakLearnerJson {
  wl_id: number;
  /** global feature indices, sorted ascending; tree indices are local */
  feature_subset: number[];
  max_depth: number;
  nodes: TreeNode[];
}

export interface ModelBundle {
  format_version: number;
  feature_count: number;
  n_learners: number;
  vote_rule: string;
  learners: WeakLearnerJson[];
}

export const BUNDLE_FORMAT_VERSION = 1;
export const VOTE_RULE = "majority-tie-malicious";

export class IngestError extends Error {}
