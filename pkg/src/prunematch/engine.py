"""Vertex-centric asynchronous execution runtime.

The pruning algorithms are written against a small vertex-program contract:
a traversal delivers an init visitor to a set of vertices, callbacks react
by pushing more visitors, and the run ends at quiescence, when no visitor
remains in flight.  This engine provides that contract in-process with a
cooperative scheduler: partitions take turns servicing their queues on one
OS thread, which keeps per-vertex execution trivially serial while still
exercising the message-passing structure (cross-partition hops, arbitrary
interleavings, backpressure) that the algorithms must tolerate.

Vertices are assigned to partitions by id modulo worker count.  With one
worker and ``deterministic`` set, delivery order is a pure FIFO and runs
reproduce exactly; with several workers the service order is shuffled per
round from the seed, deliberately perturbing interleavings so tests can
assert that algorithm outcomes do not depend on them.

Backpressure never drops a visitor: when a queue grows past
``queue_limit`` the scheduler drains it newest-first until it is back
under the limit.  Newest-first turns a fan-out wave into a depth-first
walk, so queued memory stays near the limit instead of growing with the
wave's total size.  The switch is a pure function of queue state, so
deterministic mode stays reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

INIT = "init"
ALIVE = "alive"
FORWARD = "forward"
ACK = "ack"


@dataclass(frozen=True, slots=True)
class Visitor:
    """One queued message: deliver ``payload`` to ``target``'s callback."""

    target: int
    vtype: str
    payload: object = None


@dataclass(frozen=True)
class EngineConfig:
    workers: int = 1
    deterministic: bool = False
    seed: int = 0
    queue_limit: int | None = None

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("worker count must be >= 1")
        if self.deterministic and self.workers != 1:
            raise ValueError("deterministic mode requires exactly one worker")


class CallbackError(RuntimeError):
    """A visitor callback raised; carries the failing vertex and type."""


class Engine:
    """Cooperative scheduler for one graph's worth of vertex programs.

    A traversal is: :meth:`do_traversal` to enqueue init visitors, then
    :meth:`run_until_quiescence` to drain.  Callbacks receive
    ``(engine, visitor)`` and may call :meth:`push`.
    """

    def __init__(self, n_vertices: int, config: EngineConfig | None = None,
                 partition_map=None, record_trace: bool = False):
        self.config = config or EngineConfig()
        self.n_vertices = n_vertices
        w = self.config.workers
        if partition_map is not None:
            if len(partition_map) != n_vertices:
                raise ValueError("partition map must cover every vertex")
            if any(not 0 <= p < w for p in partition_map):
                raise ValueError("partition map entry out of range")
            self._partition = list(partition_map)
        else:
            self._partition = [v % w for v in range(n_vertices)]
        self._queues = [[] for _ in range(w)]
        self._heads = [0] * w
        self._rng = random.Random(self.config.seed)
        self._callback = None
        self._running = False
        self._executing_vertex: int | None = None
        self._in_flight = 0
        self.stats: dict = {}
        self.pushed = 0
        self.init_count = 0
        self.delivered = 0
        self.peak_queued = 0
        self.trace: list | None = [] if record_trace else None

    def partition_of(self, v: int) -> int:
        return self._partition[v]

    # -- producer side ------------------------------------------------------

    def do_traversal(self, callback, targets, vtype: str = INIT, payload=None) -> None:
        """Register the callback and enqueue one init visitor per target."""
        if self._running:
            raise RuntimeError("engine already running a traversal")
        if self._in_flight:
            raise RuntimeError("visitors left over from a previous traversal")
        self._callback = callback
        for v in targets:
            self._enqueue(Visitor(int(v), vtype, payload))
            self.init_count += 1

    def push(self, visitor: Visitor) -> None:
        """Enqueue a visitor from within a callback; never drops."""
        self.pushed += 1
        self._enqueue(visitor)

    def _enqueue(self, visitor: Visitor) -> None:
        if not 0 <= visitor.target < self.n_vertices:
            raise ValueError(f"visitor target {visitor.target} out of range")
        self._queues[self._partition[visitor.target]].append(visitor)
        self._in_flight += 1
        queued = self._in_flight
        if queued > self.peak_queued:
            self.peak_queued = queued

    # -- scheduler ----------------------------------------------------------

    def _pending(self, p: int) -> int:
        return len(self._queues[p]) - self._heads[p]

    def _service_order(self) -> list:
        order = [p for p in range(self.config.workers) if self._pending(p)]
        if not self.config.deterministic and len(order) > 1:
            self._rng.shuffle(order)
        return order

    def _deliver(self, visitor: Visitor) -> None:
        if self._executing_vertex is not None:
            raise AssertionError("per-vertex serial execution violated")
        self._executing_vertex = visitor.target
        try:
            self._callback(self, visitor)
        except Exception as exc:
            raise CallbackError(
                f"callback failed at vertex {visitor.target} ({visitor.vtype})"
            ) from exc
        finally:
            self._executing_vertex = None
        self.delivered += 1
        self._in_flight -= 1
        self.stats[visitor.vtype] = self.stats.get(visitor.vtype, 0) + 1
        if self.trace is not None:
            self.trace.append((visitor.vtype, visitor.target))

    def run_until_quiescence(self, batch: int = 64) -> dict:
        """Drain all queues; returns delivered-visitor counts per type.

        Returns only when nothing is queued and no callback is executing.
        Counts accumulate across traversals on the same engine.
        """
        if self._running:
            raise RuntimeError("engine already running")
        self._running = True
        limit = self.config.queue_limit
        try:
            while self._in_flight:
                for p in self._service_order():
                    q = self._queues[p]
                    # over the limit: drain newest-first back under it
                    while limit is not None and self._pending(p) > limit:
                        self._deliver(q.pop())
                    head = self._heads[p]
                    stop = min(len(q), head + batch)
                    while head < stop:
                        visitor = q[head]
                        head += 1
                        self._heads[p] = head
                        self._deliver(visitor)
                        if limit is not None and self._pending(p) > limit:
                            break
                    # compact the drained prefix to keep memory bounded
                    head = self._heads[p]
                    if head and head == len(q):
                        q.clear()
                        self._heads[p] = 0
                    elif head > 4096:
                        del q[:head]
                        self._heads[p] = 0
        finally:
            self._running = False
        return dict(self.stats)
