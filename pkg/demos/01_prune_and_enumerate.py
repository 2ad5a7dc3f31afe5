"""
Pruning a labeled graph and enumerating matches
===============================================

The core workflow: build a background graph and a template, prune the
background down to the union of all matches, then walk the survivors.
"""

import numpy as np

from prunematch import build_graph, count, enumerate_matches, make_template, prune

# A small social-style graph: labels 0 = person, 1 = group, 2 = event.
edges = np.array([
    (0, 1), (0, 2), (1, 2),      # a person triangle, wrong labels throughout
    (0, 3), (2, 3), (3, 4), (4, 0),  # persons 0 and 5 reach group 3 and event 4
    (4, 5), (5, 3), (5, 6),
    (1, 7), (7, 8),              # a dangling arm that matches nothing
], dtype=np.int64)
labels = np.array([0, 0, 0, 1, 2, 0, 0, 1, 1], dtype=np.int64)
g = build_graph(edges, 9, labels)

# Template: person - group - event closing a triangle with a person.
t = make_template([0, 1, 2], [(0, 1), (1, 2), (0, 2)])

sol = prune(g, t)
print(f"survivors: {sol.n_active} of {g.n} vertices, "
      f"{sol.m_active} of {g.m2 // 2} edges")
print("retained vertices:", sol.vertices)

# Each surviving vertex also knows which template positions it can fill.
for v in sol.vertices:
    print(f"  vertex {v} can stand in for template positions "
          f"{sol.candidates(v)}")

# Enumeration only works inside the pruned remainder, so it stays cheap.
for phi in enumerate_matches(sol, t):
    print("match:", phi)

mc = count(sol, t)
print(f"{mc.embedding_count} embeddings, {mc.mapping_count} mappings "
      f"(automorphism order {mc.automorphism_order})")
