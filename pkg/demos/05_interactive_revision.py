"""
Revising a template without starting over
=========================================

A session keeps candidate state between edits. Adding a template edge
only tightens the current survivors; removing one restarts from a cached
candidate set instead of the whole graph. Exploratory search relaxes the
template edge by edge until something matches.
"""

import itertools

from prunematch import Session, build_graph, exploratory_search, make_template
import numpy as np

g = build_graph(
    np.array([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 2)], dtype=np.int64),
    5,
    np.array([0, 0, 0, 0, 0], dtype=np.int64),
)

# Start from a path and sculpt it into a diamond.
session = Session(g, make_template([0, 0, 0, 0],
                                   [(0, 1), (1, 2), (2, 3)]))
print(f"path: {session.solution.n_active} surviving vertices")

session.add_edge(0, 2)
print(f"+ edge q0-q2: {session.solution.n_active} survivors")

session.add_edge(1, 3)
print(f"+ edge q1-q3: {session.solution.n_active} survivors")

session.remove_edge(1, 3)
print(f"- edge q1-q3: {session.solution.n_active} survivors "
      f"({len(session.revisions)} revisions tracked)")

# When nothing matches, find the nearest relaxation that does.
k4 = make_template([0, 0, 0, 0], list(itertools.combinations(range(4), 2)))
res = exploratory_search(g, k4, max_k=3)
print(f"\n4-clique first matches after deleting {res.found_k} template "
      f"edge(s); union covers vertices {sorted(res.union_vertices)}")
