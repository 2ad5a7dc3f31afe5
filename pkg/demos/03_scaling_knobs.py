"""
Workers, determinism, and checkpoint restore
============================================

The engine splits traversal work across worker threads; results are
identical for any worker count. Long prunes can checkpoint after each
constraint and resume later, even with a different worker count.
"""

import tempfile
from pathlib import Path

from prunematch import PruneConfig, prune, resume
from prunematch.testkit import InstanceParams, random_instance

g, t = random_instance(InstanceParams(n=30, er_p=0.2, alphabet=3,
                                      template_size=5), seed=7)

# Same survivors regardless of parallelism.
for workers in (1, 4):
    sol = prune(g, t, PruneConfig(workers=workers))
    print(f"workers={workers}: {sol.n_active} vertices, {sol.m_active} edges")

# Deterministic mode fixes the traversal order for reproducible reports.
sol = prune(g, t, PruneConfig(deterministic=True, seed=42))
print("deterministic phase order:", [name for name, _ in sol.timings])

# Checkpoints land after every constraint phase; resume picks up the rest.
with tempfile.TemporaryDirectory() as ckdir:
    prune(g, t, PruneConfig(workers=4, checkpoint_dir=ckdir))
    snapshot = sorted(Path(ckdir).iterdir())[0]
    print(f"resuming from {snapshot.name}")
    restored = resume(g, str(snapshot), PruneConfig(workers=1))
    assert restored.vertices == sol.vertices
    print("restored run matches the straight-through run")
