import { describe, expect, it } from "vitest";

import { TemplateView } from "../src/template.js";

const triangle = () =>
  TemplateView.create([0, 1, 2], [[0, 1], [1, 2], [0, 2]]);

describe("TemplateView validation", () => {
  it("accepts a legal add and normalizes orientation", () => {
    const view = TemplateView.create([0, 0, 0], [[0, 1], [1, 2]]);
    expect(view.addProblem(2, 0)).toBeNull();
    view.applyAdd(2, 0);
    expect(view.hasEdge(0, 2)).toBe(true);
    expect(view.edges).toContainEqual([0, 2]);
  });

  it("refuses duplicate edges, self loops, and out-of-range endpoints", () => {
    const view = triangle();
    expect(view.addProblem(1, 0)).toMatch(/already present/);
    expect(view.addProblem(1, 1)).toMatch(/self loop/);
    expect(view.addProblem(0, 3)).toMatch(/vertex range/);
    expect(view.addProblem(0.5, 1)).toMatch(/integers/);
  });

  it("flags a disconnecting removal before submission", () => {
    const view = TemplateView.create([0, 0, 0, 0], [[0, 1], [1, 2], [0, 2], [2, 3]]);
    expect(view.removeProblem(2, 3)).toMatch(/disconnects/);
    expect(view.removeProblem(0, 1)).toBeNull(); // triangle edge is redundant
    expect(view.removeProblem(0, 3)).toMatch(/not present/);
  });

  it("treats every edge of a tree as a bridge", () => {
    const view = TemplateView.create([0, 1, 2, 3], [[0, 1], [1, 2], [2, 3]]);
    for (const [u, w] of view.edges) {
      expect(view.removeProblem(u, w)).toMatch(/disconnects/);
    }
  });
});

describe("TemplateView dirty flag", () => {
  it("rises on local edits and clears on confirmation", () => {
    const view = triangle();
    expect(view.dirty).toBe(false);
    view.applyRemove(0, 1);
    expect(view.dirty).toBe(true);
    view.confirm();
    expect(view.dirty).toBe(false);
  });

  it("revert restores the exact edge set", () => {
    const view = triangle();
    view.applyRemove(0, 1);
    view.revertRemove(0, 1);
    const edges = [...view.edges].sort((a, b) => a[0] - b[0] || a[1] - b[1]);
    expect(edges).toEqual([[0, 1], [0, 2], [1, 2]]);
  });
});

describe("TemplateView documents", () => {
  it("round-trips through its JSON form losslessly", () => {
    const view = TemplateView.create([3, 1, 4, 1], [[0, 1], [1, 2], [2, 3], [0, 3]]);
    const twin = TemplateView.fromDoc(view.toDoc());
    expect(twin.toDoc()).toEqual(view.toDoc());
  });

  it("rejects documents whose edges dangle", () => {
    expect(() =>
      TemplateView.fromDoc({
        vertices: [{ id: 0, label: 0 }, { id: 1, label: 0 }],
        edges: [[0, 2]],
      }),
    ).toThrow(/vertex range/);
  });
});
