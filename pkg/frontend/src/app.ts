/**
 * DOM wiring for the template editor page.
 *
 * Layout: an edge-list editor on the left (the template is small by
 * design, a list beats a canvas for precise edits), a force-layout
 * preview beside it, and the result panel underneath showing the
 * service's numbers for every revision. The background graph itself is
 * never drawn; it is assumed far too large.
 */

import { ServiceClient } from "./api.js";
import { forceLayout } from "./layout.js";
import { SessionController } from "./session.js";
import { TemplateView } from "./template.js";

const LABEL_COLORS = ["#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2"];

export function mountApp(root: HTMLElement, baseUrl: string): SessionController {
  const view = TemplateView.create([0, 0, 0], [[0, 1], [1, 2]]);
  const controller = new SessionController(new ServiceClient(baseUrl), view);

  root.innerHTML = `
    <div style="display:flex; gap:1.5rem; font-family:system-ui, sans-serif">
      <div>
        <h3 style="margin:0 0 .5rem">Template</h3>
        <div data-role="dirty" style="min-height:1.2em; color:#777"></div>
        <ul data-role="edges" style="list-style:none; padding:0"></ul>
        <form data-role="add-form">
          <input name="u" size="2" placeholder="u" inputmode="numeric">
          &ndash;
          <input name="w" size="2" placeholder="w" inputmode="numeric">
          <button type="submit">add edge</button>
        </form>
        <div data-role="error" style="color:#b00020; min-height:1.2em"></div>
        <button data-role="refresh">view result</button>
        <button data-role="explore">explore (k&le;2)</button>
      </div>
      <svg data-role="preview" width="320" height="240"
           style="border:1px solid #ddd; background:#fafafa"></svg>
      <div>
        <h3 style="margin:0 0 .5rem">Revisions</h3>
        <table data-role="history" style="border-collapse:collapse"></table>
      </div>
    </div>`;

  const $ = <T extends Element>(role: string): T => {
    const el = root.querySelector(`[data-role="${role}"]`);
    if (!el) throw new Error(`missing ${role}`);
    return el as T;
  };

  const render = () => {
    $<HTMLElement>("dirty").textContent = view.dirty ? "syncing edit…" : "";

    const edgeList = $<HTMLUListElement>("edges");
    edgeList.innerHTML = "";
    for (const [u, w] of view.edges) {
      const item = document.createElement("li");
      item.textContent = `q${u} – q${w} `;
      const drop = document.createElement("button");
      drop.textContent = "×";
      // pre-check so hopeless removals never reach the service
      const problem = view.removeProblem(u, w);
      if (problem) {
        drop.disabled = true;
        drop.title = problem;
      } else {
        drop.onclick = () => void controller.removeEdge(u, w).then(render);
      }
      item.appendChild(drop);
      edgeList.appendChild(item);
    }

    const err = controller.panel.error;
    $<HTMLElement>("error").textContent = err
      ? `${err.op} (${err.edge[0]}, ${err.edge[1]}) rejected: ${err.detail}`
      : "";

    renderPreview($<SVGSVGElement>("preview"), view);
    renderHistory($<HTMLTableElement>("history"), controller);
  };

  $<HTMLFormElement>("add-form").onsubmit = (ev) => {
    ev.preventDefault();
    const form = ev.target as HTMLFormElement;
    const u = Number((form.elements.namedItem("u") as HTMLInputElement).value);
    const w = Number((form.elements.namedItem("w") as HTMLInputElement).value);
    render(); // shows the optimistic edit immediately
    void controller.addEdge(u, w).then(render);
  };
  $<HTMLButtonElement>("refresh").onclick = () => void controller.viewResult().then(render);
  $<HTMLButtonElement>("explore").onclick = () =>
    void controller.explore(2).then((res) => {
      $<HTMLElement>("error").textContent =
        res.found_k === null
          ? "explore: no match up to k=2"
          : `explore: first match after deleting ${res.found_k} edge(s)`;
    });

  void controller.open().then(render);
  render();
  return controller;
}

function renderPreview(svg: SVGSVGElement, view: TemplateView): void {
  const pts = forceLayout(view.vertexCount, view.edges, { seed: 7 });
  const ns = "http://www.w3.org/2000/svg";
  svg.innerHTML = "";
  for (const [u, w] of view.edges) {
    const line = document.createElementNS(ns, "line");
    line.setAttribute("x1", String(pts[u]!.x));
    line.setAttribute("y1", String(pts[u]!.y));
    line.setAttribute("x2", String(pts[w]!.x));
    line.setAttribute("y2", String(pts[w]!.y));
    line.setAttribute("stroke", "#999");
    svg.appendChild(line);
  }
  pts.forEach((p, q) => {
    const dot = document.createElementNS(ns, "circle");
    dot.setAttribute("cx", String(p.x));
    dot.setAttribute("cy", String(p.y));
    dot.setAttribute("r", "10");
    dot.setAttribute("fill", LABEL_COLORS[view.label(q) % LABEL_COLORS.length]!);
    svg.appendChild(dot);
    const tag = document.createElementNS(ns, "text");
    tag.setAttribute("x", String(p.x));
    tag.setAttribute("y", String(p.y + 4));
    tag.setAttribute("text-anchor", "middle");
    tag.setAttribute("font-size", "10");
    tag.setAttribute("fill", "#fff");
    tag.textContent = `q${q}`;
    svg.appendChild(tag);
  });
}

function renderHistory(table: HTMLTableElement, controller: SessionController): void {
  const cell = (text: string, header = false) => {
    const td = document.createElement(header ? "th" : "td");
    td.textContent = text;
    td.style.cssText = "border:1px solid #ddd; padding:.2rem .5rem; text-align:right";
    return td;
  };
  table.innerHTML = "";
  const head = document.createElement("tr");
  for (const h of ["rev", "op", "|V*|", "|E*|", "matches", "embeddings"]) {
    head.appendChild(cell(h, true));
  }
  table.appendChild(head);
  for (const row of controller.panel.history) {
    const tr = document.createElement("tr");
    const opText = row.edge ? `${row.op} (${row.edge[0]},${row.edge[1]})` : row.op;
    tr.appendChild(cell(String(row.revision)));
    tr.appendChild(cell(opText));
    tr.appendChild(cell(String(row.vertices)));
    tr.appendChild(cell(String(row.edges)));
    tr.appendChild(cell(row.counts ? String(row.counts.mapping_count) : "–"));
    tr.appendChild(cell(row.counts ? String(row.counts.embedding_count) : "–"));
    table.appendChild(tr);
  }
}
