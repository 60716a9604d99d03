import { describe, expect, it } from "vitest";
import { predictTree, predictTreeStrict, trainTree, treeDepth } from "../src/tree.js";
import { subsetSize } from "../src/bundle.js";
import type { TreeNode } from "../src/types.js";

describe("trainTree", () => {
  it("splits separable labels at the midpoint", () => {
    const nodes = trainTree([[1], [2], [3], [4]], [0, 0, 1, 1], 3);
    expect(nodes[0]).toEqual({ f: 0, t: 2.5, l: 1, r: 2 });
    expect([1, 2.49, 2.5, 2.51, 4].map((v) => predictTree(nodes, [v]))).toEqual(
      [0, 0, 0, 1, 1],
    );
  });

  it("breaks feature ties toward the lowest index", () => {
    const nodes = trainTree(
      [[1, 1], [2, 2], [3, 3], [4, 4]],
      [0, 0, 1, 1],
      2,
    );
    expect("f" in nodes[0] && nodes[0].f).toBe(0);
  });

  it("breaks threshold ties toward the lowest threshold", () => {
    // splitting [0,1,0] at 1.5 or 2.5 is equally impure
    const nodes = trainTree([[1], [2], [3]], [0, 1, 0], 1);
    expect(nodes[0]).toMatchObject({ f: 0, t: 1.5 });
  });

  it("respects the depth limit", () => {
    const x = Array.from({ length: 64 }, (_, i) => [i]);
    const y = x.map(([v]) => (v * 7) % 3 === 0 ? 1 : 0);
    for (const depth of [1, 2, 3]) {
      expect(treeDepth(trainTree(x, y, depth))).toBeLessThanOrEqual(depth);
    }
  });

  it("collapses pure nodes to a leaf", () => {
    expect(trainTree([[1], [2], [3]], [1, 1, 1], 5)).toEqual([{ leaf: 1 }]);
  });

  it("labels unsplittable ties malicious", () => {
    expect(trainTree([[1], [1]], [0, 1], 3)).toEqual([{ leaf: 1 }]);
  });
});

describe("traversal semantics", () => {
  const nodes: TreeNode[] = [{ f: 0, t: 1.5, l: 1, r: 2 }, { leaf: 0 }, { leaf: 1 }];

  it("sends threshold-equal values left", () => {
    expect(predictTree(nodes, [1.5])).toBe(0);
    expect(predictTree(nodes, [1.5000000000000002])).toBe(1);
  });

  it("the deliberately flipped rule disagrees exactly at the threshold", () => {
    expect(predictTreeStrict(nodes, [1.5])).toBe(1);
    expect(predictTreeStrict(nodes, [1.4])).toBe(predictTree(nodes, [1.4]));
    expect(predictTreeStrict(nodes, [1.6])).toBe(predictTree(nodes, [1.6]));
  });
});

describe("subsetSize", () => {
  it.each([
    [72, 0.33, 24],
    [10, 0.25, 3],
    [10, 0.24, 2],
    [4, 0.5, 2],
    [3, 1.0, 3],
  ])("rounds %d x %f half-up to %d", (count, ratio, want) => {
    expect(subsetSize(count, ratio)).toBe(want);
  });
});
