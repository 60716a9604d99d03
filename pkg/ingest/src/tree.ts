/** CART training with the exact traversal semantics of the primary loader.
 *
 * Parity rules: Gini impurity over midpoint thresholds, ties broken toward
 * the lowest feature index and then the lowest threshold, "value <= t goes
 * left", and leaf ties classify malicious.
 */

import { IngestError, TreeNode } from "./types.js";

const EPS = 1e-12;

function gini(pos: number, n: number): number {
  const p = pos / n;
  const q = (n - pos) / n;
  return 1 - (p * p + q * q);
}

function majorityLabel(labels: number[]): number {
  let pos = 0;
  for (const y of labels) pos += y;
  return 2 * pos >= labels.length ? 1 : 0;
}

function bestSplit(
  x: number[][],
  y: number[],
  rows: number[],
): { feature: number; threshold: number } | null {
  const n = rows.length;
  let totalPos = 0;
  for (const i of rows) totalPos += y[i];
  const parent = gini(totalPos, n);
  if (parent === 0) return null;

  let best: { impurity: number; feature: number; threshold: number } | null = null;
  const width = x[rows[0]].length;
  for (let f = 0; f < width; f++) {
    const order = [...rows].sort((a, b) => x[a][f] - x[b][f]);
    let posLeft = 0;
    let bestHere: { impurity: number; threshold: number } | null = null;
    for (let k = 0; k < n - 1; k++) {
      posLeft += y[order[k]];
      const a = x[order[k]][f];
      const b = x[order[k + 1]][f];
      if (a === b) continue;
      const nLeft = k + 1;
      const weighted =
        (nLeft * gini(posLeft, nLeft) + (n - nLeft) * gini(totalPos - posLeft, n - nLeft)) / n;
      // strict < keeps the first (lowest) threshold on equal impurity
      if (bestHere === null || weighted < bestHere.impurity - EPS) {
        bestHere = { impurity: weighted, threshold: (a + b) / 2 };
      }
    }
    if (bestHere !== null && bestHere.impurity < parent - EPS) {
      // strict improvement across features keeps the lowest feature index
      if (best === null || bestHere.impurity < best.impurity - EPS) {
        best = { impurity: bestHere.impurity, feature: f, threshold: bestHere.threshold };
      }
    }
  }
  return best === null ? null : { feature: best.feature, threshold: best.threshold };
}

export function trainTree(x: number[][], y: number[], maxDepth: number): TreeNode[] {
  if (x.length === 0) throw new IngestError("cannot train on an empty dataset");
  if (maxDepth < 1) throw new IngestError("maxDepth must be >= 1");
  const nodes: TreeNode[] = [];

  const build = (rows: number[], depth: number): number => {
    const me = nodes.length;
    const labels = rows.map((i) => y[i]);
    if (depth >= maxDepth || rows.length < 2) {
      nodes.push({ leaf: majorityLabel(labels) });
      return me;
    }
    const split = bestSplit(x, y, rows);
    if (split === null) {
      nodes.push({ leaf: majorityLabel(labels) });
      return me;
    }
    nodes.push({ leaf: -1 }); // patched below, keeps pre-order placement
    const left = build(rows.filter((i) => x[i][split.feature] <= split.threshold), depth + 1);
    const right = build(rows.filter((i) => x[i][split.feature] > split.threshold), depth + 1);
    nodes[me] = { f: split.feature, t: split.threshold, l: left, r: right };
    return me;
  };

  build(x.map((_, i) => i), 0);
  return nodes;
}

export function predictTree(nodes: TreeNode[], features: number[]): number {
  let i = 0;
  for (;;) {
    const node = nodes[i];
    if ("leaf" in node) return node.leaf;
    i = features[node.f] <= node.t ? node.l : node.r;
  }
}

/** The deliberately wrong traversal (strict <) used by conformance tests. */
export function predictTreeStrict(nodes: TreeNode[], features: number[]): number {
  let i = 0;
  for (;;) {
    const node = nodes[i];
    if ("leaf" in node) return node.leaf;
    i = features[node.f] < node.t ? node.l : node.r;
  }
}

export function treeDepth(nodes: TreeNode[], at = 0): number {
  const node = nodes[at];
  if ("leaf" in node) return 0;
  return 1 + Math.max(treeDepth(nodes, node.l), treeDepth(nodes, node.r));
}
