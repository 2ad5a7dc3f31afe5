"""
Counting cliques in a synthetic scale-free graph
================================================

The recursive-matrix generator produces skewed graphs of any size from a
four-probability seed. Collapsing all labels to one value turns the
matcher into a motif counter.
"""

import itertools

from prunematch import count, make_template, prune
from prunematch.testkit import RmatParams, rmat_generate

g = rmat_generate(RmatParams(scale=8, edge_factor=16, seed=1))
print(f"generated {g.n} vertices, {g.m2 // 2} edges")

triangle = make_template([0, 0, 0], [(0, 1), (1, 2), (0, 2)])
four_clique = make_template([0, 0, 0, 0],
                            list(itertools.combinations(range(4), 2)))

for name, t in (("triangle", triangle), ("4-clique", four_clique)):
    sol = prune(g, t)
    mc = count(sol, t)
    print(f"{name}: {mc.embedding_count} embeddings on "
          f"{sol.n_active} surviving vertices")
