"""Graph storage, loaders, stats, and active-subgraph induction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prunematch.graph import (
    build_graph,
    compute_stats,
    induce_active_subgraph,
    load_edge_list,
    load_labels,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestBuildGraph:
    def test_path_graph(self):
        g = build_graph([(0, 1), (1, 2)], 3)
        assert g.n == 3
        assert g.m2 == 4
        assert list(g.neighbors(1)) == [0, 2]
        g.validate()

    def test_duplicate_and_self_edges_dropped(self):
        g = build_graph([(0, 1), (1, 0), (0, 1), (2, 2)], 3)
        assert g.m2 == 2
        assert g.degree(2) == 0

    def test_has_edge(self):
        g = build_graph([(0, 1), (1, 2)], 3)
        assert g.has_edge(0, 1) and g.has_edge(1, 0)
        assert not g.has_edge(0, 2)

    def test_adjacency_sets_match_neighbors(self):
        g = build_graph([(0, 1), (1, 2), (0, 2), (2, 3)], 4)
        sets = g.adjacency_sets()
        for v in range(g.n):
            assert sets[v] == set(g.neighbors(v))


class TestLoadEdgeList:
    def test_small_file(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 1\n1 2\n"))
        assert (g.n, g.m2) == (3, 4)
        assert set(g.neighbors(1)) == {0, 2}

    def test_self_edge_only(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 0\n"))
        assert (g.n, g.m2) == (1, 0)

    def test_duplicate_line(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 1\n0 1\n"))
        assert g.m2 == 2

    def test_comments_and_blanks(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "# header\n\n0 1\n# mid\n1 2\n"))
        assert g.m2 == 4

    def test_literal_ids_leave_gaps(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 5\n"))
        assert g.n == 6
        assert g.degree(3) == 0

    def test_compact_renumbers_by_first_appearance(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "7 3\n3 9\n"), compact=True)
        assert g.n == 3
        # 7 -> 0, 3 -> 1, 9 -> 2
        assert set(g.neighbors(1)) == {0, 2}

    def test_malformed_line_reports_lineno(self, tmp_path):
        with pytest.raises(ValueError, match="3"):
            load_edge_list(write(tmp_path, "g.txt", "0 1\n1 2\nbogus\n"))

    def test_empty_file_errors(self, tmp_path):
        with pytest.raises(ValueError):
            load_edge_list(write(tmp_path, "g.txt", "# nothing\n"))


class TestLoadLabels:
    def test_assigns_labels(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 1\n1 2\n"))
        g = load_labels(write(tmp_path, "l.txt", "0 5\n1 5\n2 7\n"), g)
        assert list(g.labels) == [5, 5, 7]
        assert g.n_labels == 8

    def test_missing_vertices_default_to_zero(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 1\n1 2\n"))
        g = load_labels(write(tmp_path, "l.txt", "2 3\n"), g)
        assert list(g.labels) == [0, 0, 3]

    def test_empty_label_file(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 1\n"))
        g = load_labels(write(tmp_path, "l.txt", ""), g)
        assert list(g.labels) == [0, 0]

    def test_out_of_range_vertex(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 1\n1 2\n"))
        with pytest.raises(ValueError):
            load_labels(write(tmp_path, "l.txt", "99 1\n"), g)

    def test_duplicate_vertex(self, tmp_path):
        g = load_edge_list(write(tmp_path, "g.txt", "0 1\n"))
        with pytest.raises(ValueError):
            load_labels(write(tmp_path, "l.txt", "0 1\n0 2\n"), g)


class TestComputeStats:
    def test_path_graph(self):
        s = compute_stats(build_graph([(0, 1), (1, 2)], 3))
        assert s.d_max == 2
        assert s.d_avg == pytest.approx(4 / 3)

    def test_k4(self):
        edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
        s = compute_stats(build_graph(edges, 4))
        assert s.d_max == 3
        assert s.d_avg == pytest.approx(3.0)
        assert s.d_sdev == pytest.approx(0.0)

    def test_label_freq(self):
        g = build_graph([(0, 1), (1, 2)], 3, labels=[4, 4, 6])
        s = compute_stats(g)
        assert s.label_freq == {4: 2, 6: 1}
        assert s.freq(4) == 2 and s.freq(99) == 0

    @given(
        st.lists(
            st.tuples(st.integers(0, 9), st.integers(0, 9)), min_size=0, max_size=30
        )
    )
    @settings(max_examples=50, deadline=None)
    def test_frequency_sum_and_mean_degree(self, pairs):
        g = build_graph(pairs, 10)
        s = compute_stats(g)
        assert sum(s.label_freq.values()) == g.n
        assert s.d_avg == pytest.approx(g.m2 / g.n)


class _FakeState:
    """Just enough state surface for induction: alpha plus an edge map."""

    def __init__(self, alpha, eps):
        self.alpha = alpha
        self.epsilon = eps


def states_for(g, inactive=(), dropped_arcs=()):
    out = []
    for v in range(g.n):
        if v in inactive:
            out.append(_FakeState(False, {}))
            continue
        eps = {
            int(w): 0
            for w in g.neighbors(v)
            if w not in inactive and (v, int(w)) not in dropped_arcs
        }
        out.append(_FakeState(True, eps))
    return out


class TestInduceActiveSubgraph:
    def triangle(self):
        return build_graph([(0, 1), (1, 2), (0, 2)], 3, labels=[1, 2, 3])

    def test_all_active_is_isomorphic_copy(self):
        g = self.triangle()
        sub, new_to_old = induce_active_subgraph(g, states_for(g))
        assert sub.n == 3 and sub.m2 == 6
        assert list(new_to_old) == [0, 1, 2]
        assert list(sub.labels) == [1, 2, 3]
        sub.validate()

    def test_all_inactive_is_empty(self):
        g = self.triangle()
        sub, new_to_old = induce_active_subgraph(g, states_for(g, inactive={0, 1, 2}))
        assert sub.n == 0 and sub.m2 == 0
        assert len(new_to_old) == 0

    def test_one_inactive_vertex_leaves_single_edge(self):
        g = self.triangle()
        sub, new_to_old = induce_active_subgraph(g, states_for(g, inactive={2}))
        assert sub.n == 2 and sub.m2 == 2
        assert list(new_to_old) == [0, 1]
        assert list(sub.labels) == [1, 2]

    def test_edge_kept_only_when_both_directions_survive(self):
        g = self.triangle()
        st_ = states_for(g, dropped_arcs={(0, 1)})
        sub, _ = induce_active_subgraph(g, st_)
        # arc 1->0 still listed, but 0->1 gone, so the edge must vanish
        assert sub.n == 3 and sub.m2 == 4
        assert not sub.has_edge(0, 1)

    def test_labels_keep_original_alphabet_width(self):
        g = self.triangle()
        sub, _ = induce_active_subgraph(g, states_for(g, inactive={2}))
        assert sub.n_labels == g.n_labels

    def test_output_validates(self):
        rng = np.random.default_rng(7)
        edges = [(int(a), int(b)) for a, b in rng.integers(0, 30, size=(120, 2))]
        g = build_graph(edges, 30, labels=list(rng.integers(0, 4, size=30)))
        sub, _ = induce_active_subgraph(g, states_for(g, inactive=set(range(0, 30, 3))))
        sub.validate()
