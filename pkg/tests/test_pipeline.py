"""Full pruning pipeline: exactness, invariance, checkpoint round-trips."""

import struct

import pytest

from prunematch.graph import build_graph
from prunematch.lcc import init_states
from prunematch.pipeline import (
    CHECKPOINT_MAGIC,
    PruneConfig,
    checkpoint,
    prune,
    restore,
    resume,
)
from prunematch.template import make_template
from prunematch.testkit import InstanceParams, oracle_enumerate, random_instance


def oracle_view(g, t):
    """(vertices, edges, omega) the way the pruned output reports them."""
    res = oracle_enumerate(g, t)
    omega = {}
    for phi in res.matches:
        for q, v in enumerate(phi):
            omega[v] = omega.get(v, 0) | 1 << q
    return sorted(res.union_vertices), sorted(res.union_edges), omega


def sol_view(sol):
    omega = {v: sol.states[v].omega for v in sol.vertices}
    return sol.vertices, sol.edges, omega


class TestPrune:
    @pytest.mark.parametrize("seed", range(10))
    def test_exact_union_of_matches(self, seed):
        g, t = random_instance(InstanceParams(), seed)
        assert sol_view(prune(g, t)) == oracle_view(g, t)

    @pytest.mark.parametrize("seed", range(6))
    def test_exact_with_repeated_labels(self, seed):
        g, t = random_instance(InstanceParams(alphabet=2, template_size=5), seed)
        assert sol_view(prune(g, t)) == oracle_view(g, t)

    def test_absent_label_empties_immediately(self):
        g = build_graph([(0, 1), (1, 2)], 3, labels=[0, 0, 0])
        t = make_template([0, 1], [(0, 1)])
        sol = prune(g, t)
        assert sol.n_active == 0
        assert sol.m_active == 0
        assert sol.reports[0][0] == "lcc"

    def test_unrolled_cycle_empties(self):
        g = build_graph(
            [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)],
            6,
            labels=[0, 1, 2, 0, 1, 2],
        )
        t = make_template([0, 1, 2], [(0, 1), (1, 2), (0, 2)])
        sol = prune(g, t)
        assert sol.n_active == 0

    def test_single_vertex_template(self):
        g = build_graph([(0, 1), (2, 3)], 4, labels=[1, 0, 1, 1])
        t = make_template([1], [])
        sol = prune(g, t)
        assert sol.vertices == [0, 2, 3]
        assert sol.edges == []
        assert len(sol.constraints) == 0
        assert all(sol.candidates(v) == (0,) for v in sol.vertices)

    def test_survivors_have_candidates_and_edges(self):
        g, t = random_instance(InstanceParams(), 2)
        sol = prune(g, t)
        assert sol.n_active > 0
        for v in sol.vertices:
            assert sol.states[v].omega != 0
            assert len(sol.states[v].epsilon) >= 1

    @pytest.mark.parametrize("seed", range(6))
    def test_reprune_of_solution_is_identity(self, seed):
        g, t = random_instance(InstanceParams(), seed)
        sol = prune(g, t)
        sub, new_to_old = sol.induced()
        again = prune(sub, t)
        assert again.vertices == list(range(sub.n))
        assert len(again.edges) == sub.m2 // 2
        for v in again.vertices:
            assert again.states[v].omega == sol.states[int(new_to_old[v])].omega

    @pytest.mark.parametrize("seed", range(6))
    def test_vertex_elimination_accounting(self, seed):
        g, t = random_instance(InstanceParams(), seed)
        initially_active = sum(1 for s in init_states(g, t) if s.alpha)
        sol = prune(g, t)
        removed = 0
        for _, r in sol.reports:
            ve = r.vertices_eliminated
            removed += sum(ve) if isinstance(ve, tuple) else ve
        assert initially_active - removed == sol.n_active

    @pytest.mark.parametrize("seed", range(6))
    def test_worker_invariance(self, seed):
        g, t = random_instance(InstanceParams(alphabet=2), seed)
        base = sol_view(prune(g, t, PruneConfig(workers=1)))
        for workers in (2, 4):
            cfg = PruneConfig(workers=workers, seed=seed + 7)
            assert sol_view(prune(g, t, cfg)) == base

    @pytest.mark.parametrize("seed", range(4))
    def test_ablation_flags_do_not_change_results(self, seed):
        g, t = random_instance(InstanceParams(alphabet=2), seed)
        base = sol_view(prune(g, t))
        for cfg in (
            PruneConfig(edge_elimination=False),
            PruneConfig(work_aggregation=False),
            PruneConfig(edge_elimination=False, work_aggregation=False),
        ):
            assert sol_view(prune(g, t, cfg)) == base

    def test_deterministic_replay(self):
        g, t = random_instance(InstanceParams(), 1)
        cfg = PruneConfig(deterministic=True)
        a = prune(g, t, cfg)
        b = prune(g, t, cfg)
        assert a.reports == b.reports
        assert sol_view(a) == sol_view(b)

    def test_constraint_order_override(self):
        g, t = random_instance(InstanceParams(), 4)
        base = prune(g, t)
        names = [c.name for c in base.constraints]
        if len(names) > 1:
            cfg = PruneConfig(constraint_order=tuple(reversed(names)))
            assert sol_view(prune(g, t, cfg)) == sol_view(base)
        with pytest.raises(ValueError, match="unknown constraint"):
            prune(g, t, PruneConfig(constraint_order=("nope",) + tuple(names)))
        if names:
            with pytest.raises(ValueError, match="every generated constraint"):
                prune(g, t, PruneConfig(constraint_order=tuple(names[:-1])))

    def test_report_trail_shape(self):
        g, t = random_instance(InstanceParams(), 0)
        sol = prune(g, t)
        tags = [tag for tag, _ in sol.reports]
        assert tags[0] == "lcc"
        assert tags[-1] == "refine"
        assert set(tags) <= {"lcc", "nlcc", "refine"}
        assert len(sol.timings) == len(sol.reports)
        assert all(dt >= 0 for _, dt in sol.timings)


class TestCheckpoint:
    def _files(self, tmp_path):
        return sorted(tmp_path.iterdir())

    def test_resume_from_every_boundary(self, tmp_path):
        g, t = random_instance(InstanceParams(alphabet=2), 5)
        final = sol_view(prune(g, t, PruneConfig(checkpoint_dir=str(tmp_path))))
        files = self._files(tmp_path)
        assert files
        for f in files:
            assert sol_view(resume(g, str(f))) == final

    def test_worker_count_change(self, tmp_path):
        g, t = random_instance(InstanceParams(), 6)
        cfg = PruneConfig(workers=4, checkpoint_dir=str(tmp_path))
        final = sol_view(prune(g, t, cfg))
        first = self._files(tmp_path)[0]
        assert sol_view(resume(g, str(first), PruneConfig(workers=1))) == final
        assert sol_view(resume(g, str(first), PruneConfig(workers=4))) == final

    def test_flags_survive_round_trip(self, tmp_path):
        g, t = random_instance(InstanceParams(), 7)
        cfg = PruneConfig(edge_elimination=False, checkpoint_dir=str(tmp_path))
        final = sol_view(prune(g, t, cfg))
        first = self._files(tmp_path)[0]
        run = restore(str(first), g)
        assert run.flags["edge_elimination"] is False
        assert sol_view(resume(g, str(first))) == final

    def test_empty_state_checkpoint(self, tmp_path):
        g = build_graph([(0, 1)], 2, labels=[0, 0])
        t = make_template([0, 1], [(0, 1)])
        prune(g, t, PruneConfig(checkpoint_dir=str(tmp_path)))
        first = self._files(tmp_path)[0]
        sol = resume(g, str(first))
        assert sol.n_active == 0

    def test_rejects_garbage(self, tmp_path):
        p = tmp_path / "junk.pmck"
        p.write_bytes(b"XXXXnot a checkpoint")
        g = build_graph([(0, 1)], 2, labels=[0, 1])
        with pytest.raises(ValueError, match="not a checkpoint"):
            restore(str(p), g)

    def test_rejects_truncation(self, tmp_path):
        g, t = random_instance(InstanceParams(), 8)
        prune(g, t, PruneConfig(checkpoint_dir=str(tmp_path)))
        first = self._files(tmp_path)[0]
        blob = first.read_bytes()
        first.write_bytes(blob[:-4])
        with pytest.raises(ValueError, match="corrupt"):
            restore(str(first), g)

    def test_rejects_unknown_version(self, tmp_path):
        p = tmp_path / "v99.pmck"
        p.write_bytes(CHECKPOINT_MAGIC + struct.pack("<II", 99, 0))
        g = build_graph([(0, 1)], 2, labels=[0, 1])
        with pytest.raises(ValueError, match="version"):
            restore(str(p), g)

    def test_rejects_mismatched_graph(self, tmp_path):
        g, t = random_instance(InstanceParams(), 9)
        prune(g, t, PruneConfig(checkpoint_dir=str(tmp_path)))
        first = self._files(tmp_path)[0]
        other = build_graph([(0, 1), (1, 2)], 3, labels=[0, 1, 2])
        with pytest.raises(ValueError, match="does not match"):
            restore(str(first), other)

    def test_rejects_mid_phase_state(self, tmp_path):
        # asymmetric edge map only exists inside a phase
        g = build_graph([(0, 1)], 2, labels=[0, 1])
        t = make_template([0, 1], [(0, 1)])
        states = init_states(g, t)
        del states[0].epsilon[1]
        del states[0].eps_stamp[1]
        with pytest.raises(ValueError, match="phase boundary"):
            checkpoint(str(tmp_path / "x.pmck"), g, t, states, {"next": 0})

    def test_rejects_oversized_candidate_sets(self, tmp_path):
        n = 130
        t = make_template([0] * n, [(i, i + 1) for i in range(n - 1)])
        g = build_graph([(0, 1)], 2, labels=[0, 0])
        with pytest.raises(ValueError, match="128 bits"):
            checkpoint(str(tmp_path / "x.pmck"), g, t, init_states(g, t), {})
