/**
 * Result panel state: one row per confirmed revision.
 *
 * Numbers are stored exactly as the service returned them. The panel
 * never derives counts itself; its only logic is bookkeeping.
 */

import type { ResultPayload, SessionStats } from "./api.js";

export interface RevisionRow {
  revision: number;
  op: "create" | "add" | "remove";
  edge: [number, number] | null;
  /** From the edit response itself. */
  vertices: number;
  edges: number;
  /** Filled in when the user views the result; null until then. */
  counts: ResultPayload | null;
}

export interface InlineError {
  op: "add" | "remove";
  edge: [number, number];
  detail: string;
}

export class ResultPanelModel {
  private rows: RevisionRow[] = [];
  /** Last rejected edit, shown next to the editor until the next action. */
  error: InlineError | null = null;

  recordCreate(stats: SessionStats): void {
    this.error = null;
    this.rows.push({
      revision: 0,
      op: "create",
      edge: null,
      vertices: stats.vertices,
      edges: stats.edges,
      counts: null,
    });
  }

  recordEdit(op: "add" | "remove", edge: [number, number], stats: SessionStats): void {
    this.error = null;
    this.rows.push({
      revision: this.rows.length,
      op,
      edge,
      vertices: stats.vertices,
      edges: stats.edges,
      counts: null,
    });
  }

  recordResult(result: ResultPayload): void {
    const row = this.rows[this.rows.length - 1];
    if (!row) throw new Error("no revision to attach a result to");
    row.counts = result;
  }

  recordRejection(op: "add" | "remove", edge: [number, number], detail: string): void {
    this.error = { op, edge, detail };
  }

  get history(): readonly RevisionRow[] {
    return this.rows;
  }

  get current(): RevisionRow | null {
    return this.rows[this.rows.length - 1] ?? null;
  }
}
