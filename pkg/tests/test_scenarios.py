"""Interactive revision sessions, candidate sets, and deletion search."""

import itertools
import random

import pytest

from prunematch.graph import build_graph, compute_stats
from prunematch.lcc import init_states, lcc_fixed_point
from prunematch.pipeline import PruneConfig, prune
from prunematch.nlcc import check_constraint
from prunematch.scenarios import (
    Session,
    WorkReuseCache,
    build_candidate_set,
    constraint_fingerprint,
    exploratory_search,
    session_add_edge,
    session_remove_edge,
)
from prunematch.template import analyze, generate_constraints, make_template
from prunematch.testkit import InstanceParams, oracle_enumerate, random_instance


def sol_view(sol):
    omega = {v: sol.states[v].omega for v in sol.vertices}
    return sol.vertices, sol.edges, omega


def connected_deletions(t, k):
    """All templates obtained from t by deleting k edges, still connected."""
    out = []
    for removed in itertools.combinations(t.edges, k):
        gone = set(removed)
        try:
            out.append(
                (removed, make_template(t.labels, [e for e in t.edges if e not in gone]))
            )
        except ValueError:
            continue
    return out


def removable_edge(t):
    """Some edge whose deletion keeps t connected, or None."""
    for e in t.edges:
        try:
            make_template(t.labels, [x for x in t.edges if x != e])
        except ValueError:
            continue
        return e
    return None


def absent_edge(t):
    """Some vertex pair t does not join, or None."""
    for u in range(t.n0):
        for w in range(u + 1, t.n0):
            if not t.has_edge(u, w):
                return (u, w)
    return None


class TestCandidateSet:
    def test_template_copy_keeps_every_image_vertex(self):
        t = make_template([0, 1, 2, 1], [(0, 1), (1, 2), (2, 3)])
        g = build_graph(list(t.edges), 4, labels=list(t.labels))
        cs = build_candidate_set(g, t)
        for q in range(t.n0):
            assert q in cs
            assert cs.omega[q] >> q & 1

    def test_label_absent_vertices_excluded(self):
        g = build_graph([(0, 1), (1, 2)], 3, labels=[0, 1, 7])
        t = make_template([0, 1], [(0, 1)])
        cs = build_candidate_set(g, t)
        assert 2 not in cs

    def test_label_match_without_supporting_neighbor_excluded(self):
        # vertex 3 carries a matching label but all its neighbors do not
        g = build_graph([(0, 1), (2, 3)], 4, labels=[0, 1, 9, 0])
        t = make_template([0, 1], [(0, 1)])
        cs = build_candidate_set(g, t)
        assert cs.vertices == (0, 1)

    def test_single_vertex_template_keeps_all_label_matches(self):
        g = build_graph([(0, 1)], 3, labels=[5, 0, 5])
        t = make_template([5], [])
        cs = build_candidate_set(g, t)
        assert cs.vertices == (0, 2)

    @pytest.mark.parametrize("seed", range(5))
    def test_superset_of_every_deletion_variant_union(self, seed):
        g, t = random_instance(InstanceParams(template_size=4, alphabet=2), seed)
        cs = build_candidate_set(g, t)
        max_k = t.m0 - (t.n0 - 1)
        for k in range(max_k + 1):
            for _, variant in connected_deletions(t, k):
                for phi in oracle_enumerate(g, variant).matches:
                    for q, v in enumerate(phi):
                        assert cs.omega.get(v, 0) >> q & 1


class TestWorkReuseCache:
    def _prepared(self):
        """Triangle-in-graph states with the cycle wave already verified."""
        g = build_graph(
            [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 0)],
            5,
            labels=[0, 1, 2, 0, 1],
        )
        t = make_template([0, 1, 2], [(0, 1), (1, 2), (0, 2)])
        c = generate_constraints(t, analyze(t), compute_stats(g))[0]
        states = init_states(g, t)
        lcc_fixed_point(g, t, states)
        cache = WorkReuseCache()
        fp = constraint_fingerprint(c)
        check_constraint(
            g, t, c, states,
            witness_sink=lambda v, walk: cache.record_pass(v, fp, walk),
        )
        return c, fp, states, cache

    def test_pass_verdict_needs_live_witness(self):
        c, fp, states, cache = self._prepared()
        src = next(v for (v, _), _ in list(cache.passes.items()))
        assert cache.consult(src, fp, c, states) is True
        walk = cache.passes[(src, fp)]
        states[walk[1]].alpha = False
        assert cache.consult(src, fp, c, states) is None
        assert (src, fp) not in cache.passes

    def test_pass_verdict_rechecks_candidate_bits(self):
        # the interior vertex stays alive but loses the walk's candidate;
        # liveness alone would wrongly keep the verdict
        c, fp, states, cache = self._prepared()
        src = next(v for (v, _), _ in list(cache.passes.items()))
        walk = cache.passes[(src, fp)]
        interior = walk[1]
        states[interior].omega &= ~(1 << c.walk[1])
        assert states[interior].alpha
        assert cache.consult(src, fp, c, states) is None

    def test_pass_verdict_rechecks_surviving_edges(self):
        c, fp, states, cache = self._prepared()
        src = next(v for (v, _), _ in list(cache.passes.items()))
        walk = cache.passes[(src, fp)]
        del states[walk[0]].epsilon[walk[1]]
        assert cache.consult(src, fp, c, states) is None

    def test_fail_verdict_expires_on_bump(self):
        c, fp, states, cache = self._prepared()
        cache.record_fail(9, fp)
        assert cache.consult(9, fp, c, states) is False
        cache.bump()
        assert cache.consult(9, fp, c, states) is None
        assert cache.fail_hits == 1


class TestSession:
    @pytest.mark.parametrize("seed", range(5))
    def test_initial_solution_matches_cold_prune(self, seed):
        g, t = random_instance(InstanceParams(), seed)
        assert sol_view(Session(g, t).solution) == sol_view(prune(g, t))

    @pytest.mark.parametrize("seed", range(8))
    def test_add_edge_matches_cold_prune(self, seed):
        g, t = random_instance(InstanceParams(template_size=5), seed)
        e = removable_edge(t)
        if e is None:
            pytest.skip("tree template: nothing to re-add")
        base = make_template(t.labels, [x for x in t.edges if x != e])
        sess = Session(g, base)
        sess.add_edge(*e)
        assert sess.template.edges == t.edges
        assert sol_view(sess.solution) == sol_view(prune(g, t))

    @pytest.mark.parametrize("seed", range(8))
    def test_remove_edge_matches_cold_prune(self, seed):
        g, t = random_instance(InstanceParams(template_size=5), seed)
        e = removable_edge(t)
        if e is None:
            pytest.skip("tree template: nothing to remove")
        relaxed = make_template(t.labels, [x for x in t.edges if x != e])
        sess = Session(g, t)
        sess.remove_edge(*e)
        assert sol_view(sess.solution) == sol_view(prune(g, relaxed))

    @pytest.mark.parametrize("seed", range(6))
    def test_add_then_remove_restores_previous_result(self, seed):
        g, t = random_instance(InstanceParams(template_size=4), seed)
        e = absent_edge(t)
        if e is None:
            pytest.skip("complete template: nothing to add")
        sess = Session(g, t)
        before = sol_view(sess.solution)
        session_add_edge(sess, e)
        session_remove_edge(sess, e)
        assert sess.template.edges == t.edges
        assert sol_view(sess.solution) == before

    def test_remove_last_cycle_edge_matches_acyclic_cold_prune(self):
        rng = random.Random(11)
        edges = [(u, w) for u in range(12) for w in range(u + 1, 12) if rng.random() < 0.4]
        g = build_graph(edges, 12, labels=[v % 2 for v in range(12)])
        cyc = make_template([0, 1, 0, 1], [(0, 1), (1, 2), (2, 3), (0, 3)])
        path = make_template([0, 1, 0, 1], [(0, 1), (1, 2), (2, 3)])
        sess = Session(g, cyc)
        sess.remove_edge(0, 3)
        assert sol_view(sess.solution) == sol_view(prune(g, path))

    def test_disconnecting_removal_rejected_and_state_kept(self):
        g = build_graph([(0, 1), (1, 2), (2, 3)], 4, labels=[0, 1, 0, 1])
        t = make_template([0, 1, 0], [(0, 1), (1, 2)])
        sess = Session(g, t)
        before = sol_view(sess.solution)
        with pytest.raises(ValueError, match="disconnect"):
            sess.remove_edge(0, 1)
        assert sess.template.edges == t.edges
        assert sol_view(sess.solution) == before
        assert [r.op for r in sess.revisions] == ["create"]

    def test_removal_isolating_a_leaf_rejected(self):
        g = build_graph([(0, 1), (1, 2)], 3, labels=[0, 1, 0])
        t = make_template([0, 1], [(0, 1)])
        sess = Session(g, t)
        with pytest.raises(ValueError, match="disconnect"):
            sess.remove_edge(0, 1)

    def test_invalid_edits_rejected(self):
        g = build_graph([(0, 1), (1, 2), (0, 2)], 3, labels=[0, 1, 2])
        t = make_template([0, 1, 2], [(0, 1), (1, 2)])
        sess = Session(g, t)
        with pytest.raises(ValueError, match="already has"):
            sess.add_edge(0, 1)
        with pytest.raises(ValueError, match="distinct"):
            sess.add_edge(1, 1)
        with pytest.raises(ValueError, match="unknown template vertex"):
            sess.add_edge(0, 5)
        with pytest.raises(ValueError, match="no edge"):
            sess.remove_edge(0, 2)
        assert sess.template.edges == t.edges

    @pytest.mark.parametrize("seed", range(6))
    def test_random_revision_sequences_track_cold_prune(self, seed):
        g, t = random_instance(InstanceParams(template_size=4, alphabet=2), seed)
        rng = random.Random(seed * 31 + 5)
        sess = Session(g, t)
        for _ in range(4):
            add, rem = absent_edge(sess.template), removable_edge(sess.template)
            options = [e for e in (add,) if e] + [("rm", rem) for _ in (1,) if rem]
            if not options:
                break
            pick = rng.choice(options)
            if isinstance(pick[0], str):
                sess.remove_edge(*pick[1])
            else:
                sess.add_edge(*pick)
            assert sol_view(sess.solution) == sol_view(prune(g, sess.template))

    def test_revision_log_records_edits_and_sizes(self):
        g = build_graph([(0, 1), (1, 2), (0, 2)], 3, labels=[0, 1, 2])
        t = make_template([0, 1, 2], [(0, 1), (1, 2)])
        sess = Session(g, t)
        sess.add_edge(0, 2)
        sess.remove_edge(0, 2)
        ops = [(r.op, r.edge) for r in sess.revisions]
        assert ops == [("create", ()), ("add", (0, 2)), ("remove", (0, 2))]
        assert all(r.seconds >= 0 for r in sess.revisions)
        assert sess.revisions[-1].vertices == sess.solution.n_active

    def test_shared_cycle_witnesses_are_reused_on_addition(self):
        # the plain square persists as a constraint of the chorded square,
        # so its verified sources consult straight through the cache
        g = build_graph(
            [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)], 4, labels=[0, 0, 0, 0]
        )
        square = make_template([0, 0, 0, 0], [(0, 1), (1, 2), (2, 3), (0, 3)])
        chorded = make_template(
            [0, 0, 0, 0], [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]
        )
        fps = lambda t: {
            constraint_fingerprint(c)
            for c in generate_constraints(t, analyze(t), compute_stats(g))
        }
        assert fps(square) & fps(chorded)
        sess = Session(g, square)
        assert sess.cache.pass_hits == 0
        sess.add_edge(0, 2)
        assert sess.cache.pass_hits > 0
        assert sol_view(sess.solution) == sol_view(prune(g, chorded))


class TestExploratorySearch:
    def test_matching_template_found_at_level_zero(self):
        g, t = random_instance(InstanceParams(), 2)
        sol = prune(g, t)
        assert sol.n_active > 0
        res = exploratory_search(g, t, max_k=2)
        assert res.found_k == 0
        assert len(res.levels) == 1
        assert list(res.union_vertices) == sol.vertices
        assert list(res.union_edges) == sol.edges

    def test_clique_over_paw_graph_relaxes_to_level_two(self):
        # densest structure is a triangle with a pendant: no 4-clique, no
        # diamond, so the first hits are 2-deletion variants
        g = build_graph([(0, 1), (1, 2), (0, 2), (2, 3)], 4, labels=[0, 0, 0, 0])
        k4 = make_template([0, 0, 0, 0], list(itertools.combinations(range(4), 2)))
        res = exploratory_search(g, k4, max_k=3)
        assert res.found_k == 2
        assert [lvl.k for lvl in res.levels] == [0, 1, 2]
        assert len(res.levels[1].variants) == 6
        assert len(res.levels[2].variants) == 15
        assert res.levels[2].matched_variants == 12
        assert res.union_vertices == (0, 1, 2, 3)
        assert res.union_edges == ((0, 1), (0, 2), (1, 2), (2, 3))

    def test_unreached_depth_reports_not_found(self):
        g = build_graph([(0, 1), (1, 2), (0, 2), (2, 3)], 4, labels=[0, 0, 0, 0])
        k4 = make_template([0, 0, 0, 0], list(itertools.combinations(range(4), 2)))
        res = exploratory_search(g, k4, max_k=1)
        assert res.found_k is None
        assert not res.found
        assert [lvl.k for lvl in res.levels] == [0, 1]
        assert res.union_vertices == ()

    def test_tree_template_stops_when_no_variant_stays_connected(self):
        g = build_graph([(0, 1)], 2, labels=[0, 0])
        p3 = make_template([0, 0, 0], [(0, 1), (1, 2)])
        res = exploratory_search(g, p3, max_k=4)
        assert res.found_k is None
        assert [lvl.k for lvl in res.levels] == [0]

    @pytest.mark.parametrize("seed", range(4))
    def test_levels_and_union_match_variant_oracle(self, seed):
        g, t = random_instance(InstanceParams(template_size=4, alphabet=2), seed)
        e = absent_edge(t)
        if e is None:
            pytest.skip("complete template: cannot over-constrain")
        t_over = make_template(t.labels, list(t.edges) + [e])
        res = exploratory_search(g, t_over, max_k=3)
        for k in range(4):
            variants = connected_deletions(t_over, k)
            if not variants:
                assert res.found_k is None
                return
            uv, ue = set(), set()
            for _, variant in variants:
                o = oracle_enumerate(g, variant)
                uv |= set(o.union_vertices)
                ue |= set(o.union_edges)
            if uv:
                assert res.found_k == k
                assert set(res.union_vertices) == uv
                assert set(res.union_edges) == ue
                return
        assert res.found_k is None
