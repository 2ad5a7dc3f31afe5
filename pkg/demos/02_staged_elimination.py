"""
Watching the elimination stages do their work
=============================================

Local checking compares each vertex against its immediate neighborhood,
so it cannot tell a 6-cycle with labels abcabc from a triangle abc: every
vertex sees exactly the right neighbors. The nonlocal cycle constraint
walks the actual closed path and settles the question.
"""

import numpy as np

from prunematch import build_graph, make_template, plan_constraints, prune
from prunematch.pipeline import PruneConfig

# The classic trap: a 6-cycle whose label sequence repeats the triangle's.
g = build_graph(
    np.array([(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], dtype=np.int64),
    6,
    np.array([0, 1, 2, 0, 1, 2], dtype=np.int64),
)
t = make_template([0, 1, 2], [(0, 1), (1, 2), (0, 2)])

cs = plan_constraints(g, t, PruneConfig())
print("planned constraints:")
for c in cs:
    print(f"  {c.name}: {c.kind} walk {'-'.join(f'q{q}' for q in c.walk)}")

sol = prune(g, t)
print("\nphase history:")
for (tag, report), (name, seconds) in zip(sol.reports, sol.timings):
    if tag == "lcc":
        print(f"  {name}: {sum(report.vertices_eliminated)} vertices "
              f"eliminated over {report.iterations} iterations")
    elif tag == "nlcc":
        print(f"  {name}: {report.vertices_eliminated} vertices eliminated, "
              f"{report.forwards} tokens forwarded")

print(f"\nfinal survivors: {sol.n_active}  (no triangle hides in a 6-cycle)")
