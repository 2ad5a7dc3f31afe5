/**
 * Small force layout for the template preview.
 *
 * Spring attraction along edges, pairwise repulsion, mild centering;
 * enough for templates of a handful of vertices, which is all the editor
 * deals with. Deterministic for a given seed so previews do not jitter
 * between renders.
 */

export interface LayoutOptions {
  width?: number;
  height?: number;
  iterations?: number;
  seed?: number;
}

export interface Point {
  x: number;
  y: number;
}

export function forceLayout(
  n: number,
  edges: readonly [number, number][],
  opts: LayoutOptions = {},
): Point[] {
  const width = opts.width ?? 320;
  const height = opts.height ?? 240;
  const iterations = opts.iterations ?? 200;
  const rand = mulberry32(opts.seed ?? 1);

  // Circle start in index order: deterministic, and already uncrossed for
  // the ring-like templates the editor mostly sees. The jitter breaks the
  // exact symmetries that would otherwise pin the relaxation.
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(width, height) * 0.35;
  const pts: Point[] = Array.from({ length: n }, (_, i) => ({
    x: cx + radius * Math.cos((2 * Math.PI * i) / Math.max(n, 1)) + (rand() - 0.5),
    y: cy + radius * Math.sin((2 * Math.PI * i) / Math.max(n, 1)) + (rand() - 0.5),
  }));
  if (n <= 1) return pts;

  const spring = Math.min(width, height) / Math.max(2, Math.sqrt(n) + 1);
  for (let it = 0; it < iterations; it++) {
    const heat = (spring / 2) * (1 - it / iterations) ** 2 + 0.05;
    const fx = new Array<number>(n).fill(0);
    const fy = new Array<number>(n).fill(0);

    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        const dx = pts[i]!.x - pts[j]!.x;
        const dy = pts[i]!.y - pts[j]!.y;
        const d2 = Math.max(dx * dx + dy * dy, 0.01);
        const push = (spring * spring) / d2;
        const d = Math.sqrt(d2);
        fx[i]! += (dx / d) * push;
        fy[i]! += (dy / d) * push;
        fx[j]! -= (dx / d) * push;
        fy[j]! -= (dy / d) * push;
      }
    }
    for (const [u, w] of edges) {
      const dx = pts[u]!.x - pts[w]!.x;
      const dy = pts[u]!.y - pts[w]!.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 0.1);
      const pull = (d - spring) * 0.2;
      fx[u]! -= (dx / d) * pull;
      fy[u]! -= (dy / d) * pull;
      fx[w]! += (dx / d) * pull;
      fy[w]! += (dy / d) * pull;
    }

    for (let i = 0; i < n; i++) {
      fx[i]! += (cx - pts[i]!.x) * 0.02;
      fy[i]! += (cy - pts[i]!.y) * 0.02;
      const norm = Math.max(Math.hypot(fx[i]!, fy[i]!), 1e-9);
      const step = Math.min(norm, heat);
      pts[i]!.x += (fx[i]! / norm) * step;
      pts[i]!.y += (fy[i]! / norm) * step;
      pts[i]!.x = Math.min(Math.max(pts[i]!.x, 8), width - 8);
      pts[i]!.y = Math.min(Math.max(pts[i]!.y, 8), height - 8);
    }
  }
  return pts;
}

/** Tiny seeded generator; layout quality does not warrant a dependency. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
