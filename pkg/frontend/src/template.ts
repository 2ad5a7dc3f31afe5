/**
 * Editable template model backing the list editor.
 *
 * Edits that would break the template's invariants are flagged here,
 * before anything reaches the service: the search template must stay
 * connected, so a bridge-edge removal is refused client-side. The dirty
 * flag tracks local edits the service has not yet confirmed.
 */

import type { TemplateDoc } from "./api.js";

export class TemplateView {
  sessionId: string | null = null;
  dirty = false;

  private constructor(
    private labels: number[],
    private edgeList: [number, number][],
  ) {}

  static create(labels: number[], edges: [number, number][]): TemplateView {
    const view = new TemplateView([...labels], edges.map(normalize));
    for (const [u, w] of view.edgeList) view.checkEndpoints(u, w);
    return view;
  }

  static fromDoc(doc: TemplateDoc): TemplateView {
    const labels: number[] = [];
    for (const { id, label } of doc.vertices) labels[id] = label;
    return TemplateView.create(labels, doc.edges);
  }

  toDoc(): TemplateDoc {
    return {
      vertices: this.labels.map((label, id) => ({ id, label })),
      edges: this.edgeList.map(([u, w]) => [u, w]),
    };
  }

  get vertexCount(): number {
    return this.labels.length;
  }

  get edges(): readonly [number, number][] {
    return this.edgeList;
  }

  label(q: number): number {
    const l = this.labels[q];
    if (l === undefined) throw new Error(`no vertex ${q}`);
    return l;
  }

  hasEdge(u: number, w: number): boolean {
    const [a, b] = normalize([u, w]);
    return this.edgeList.some(([x, y]) => x === a && y === b);
  }

  private checkEndpoints(u: number, w: number): void {
    if (!Number.isInteger(u) || !Number.isInteger(w)) throw new Error("vertex ids must be integers");
    if (u === w) throw new Error("self loops are not allowed");
    if (u < 0 || w < 0 || u >= this.labels.length || w >= this.labels.length) {
      throw new Error(`edge (${u}, ${w}) leaves the vertex range`);
    }
  }

  /** Reason an add would be refused, or null if it is fine. */
  addProblem(u: number, w: number): string | null {
    try {
      this.checkEndpoints(u, w);
    } catch (err) {
      return (err as Error).message;
    }
    if (this.hasEdge(u, w)) return `edge (${u}, ${w}) already present`;
    return null;
  }

  /** Reason a removal would be refused, or null. Connectivity is the interesting one. */
  removeProblem(u: number, w: number): string | null {
    try {
      this.checkEndpoints(u, w);
    } catch (err) {
      return (err as Error).message;
    }
    if (!this.hasEdge(u, w)) return `edge (${u}, ${w}) not present`;
    if (!this.connectedWithout(u, w)) {
      return `removing (${u}, ${w}) disconnects the template`;
    }
    return null;
  }

  private connectedWithout(u: number, w: number): boolean {
    const [a, b] = normalize([u, w]);
    const adj: number[][] = this.labels.map(() => []);
    for (const [x, y] of this.edgeList) {
      if (x === a && y === b) continue;
      adj[x]!.push(y);
      adj[y]!.push(x);
    }
    const seen = new Set<number>([0]);
    const stack = [0];
    while (stack.length > 0) {
      const v = stack.pop()!;
      for (const next of adj[v]!) {
        if (!seen.has(next)) {
          seen.add(next);
          stack.push(next);
        }
      }
    }
    return seen.size === this.labels.length;
  }

  /** Apply an edit locally; caller must have cleared it via the problem checks. */
  applyAdd(u: number, w: number): void {
    const problem = this.addProblem(u, w);
    if (problem) throw new Error(problem);
    this.edgeList.push(normalize([u, w]));
    this.dirty = true;
  }

  applyRemove(u: number, w: number): void {
    const problem = this.removeProblem(u, w);
    if (problem) throw new Error(problem);
    const [a, b] = normalize([u, w]);
    this.edgeList = this.edgeList.filter(([x, y]) => !(x === a && y === b));
    this.dirty = true;
  }

  /** Undo of applyAdd/applyRemove for service rejections. */
  revertAdd(u: number, w: number): void {
    const [a, b] = normalize([u, w]);
    this.edgeList = this.edgeList.filter(([x, y]) => !(x === a && y === b));
  }

  revertRemove(u: number, w: number): void {
    this.edgeList.push(normalize([u, w]));
  }

  confirm(): void {
    this.dirty = false;
  }
}

function normalize([u, w]: [number, number]): [number, number] {
  return u < w ? [u, w] : [w, u];
}
