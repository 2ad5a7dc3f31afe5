"""JSON service endpoints: parity with direct calls, errors, isolation."""

import itertools
import threading

import pytest
from fastapi.testclient import TestClient

from prunematch.graph import build_graph
from prunematch.pipeline import prune
from prunematch.enumeration import count
from prunematch.scenarios import exploratory_search
from prunematch.service import (
    SCHEMA_VERSION,
    create_app,
    template_from_json,
    template_to_json,
)
from prunematch.template import make_template
from prunematch.testkit import InstanceParams, random_instance, verify_match


def template_doc(t):
    return template_to_json(t)


@pytest.fixture(scope="module")
def setup():
    g, t = random_instance(InstanceParams(template_size=4, alphabet=2), 3)
    client = TestClient(create_app(g))
    return g, t, client


def make_session(client, t):
    resp = client.post("/session", json={"template": template_doc(t)})
    assert resp.status_code == 200
    return resp.json()


class TestTemplateJson:
    def test_round_trip_is_lossless(self):
        t = make_template([0, 2, 1], [(0, 1), (1, 2), (0, 2)])
        assert template_from_json(template_to_json(t)) == t

    def test_canonical_form_is_a_fixed_point(self):
        doc = {
            "vertices": [{"id": 1, "label": 3}, {"id": 0, "label": 2}],
            "edges": [[1, 0]],
        }
        canon = template_to_json(template_from_json(doc))
        assert canon == template_to_json(template_from_json(canon))
        assert canon["edges"] == [[0, 1]]

    def test_sparse_ids_rejected(self):
        doc = {"vertices": [{"id": 0, "label": 0}, {"id": 2, "label": 0}], "edges": [[0, 2]]}
        with pytest.raises(ValueError, match="dense"):
            template_from_json(doc)


class TestSessionEndpoints:
    def test_create_reports_prune_stats(self, setup):
        g, t, client = setup
        body = make_session(client, t)
        sol = prune(g, t)
        assert body["schema_version"] == SCHEMA_VERSION
        assert body["stats"]["vertices"] == sol.n_active
        assert body["stats"]["edges"] == sol.m_active
        assert body["stats"]["revision"]["op"] == "create"

    def test_result_matches_direct_prune_and_count(self, setup):
        g, t, client = setup
        sid = make_session(client, t)["session_id"]
        res = client.get(f"/session/{sid}/result").json()
        sol = prune(g, t)
        mc = count(sol, t)
        assert res["vertices"] == sol.n_active
        assert res["edges"] == sol.m_active
        assert res["mapping_count"] == mc.mapping_count
        assert res["embedding_count"] == mc.embedding_count
        assert res["automorphism_order"] == mc.automorphism_order
        assert len(res["sample_matches"]) <= 5
        for phi in res["sample_matches"]:
            assert verify_match(g, t, phi)
        assert any(name == "refine" for name, _ in res["timings"])

    def test_sample_limit_respected(self, setup):
        g, t, client = setup
        sid = make_session(client, t)["session_id"]
        res = client.get(f"/session/{sid}/result", params={"samples": 1}).json()
        assert len(res["sample_matches"]) <= 1

    def test_edit_then_result_matches_cold_prune(self, setup):
        g, t, client = setup
        spare = next(
            (u, w)
            for u in range(t.n0)
            for w in range(u + 1, t.n0)
            if not t.has_edge(u, w)
        )
        sid = make_session(client, t)["session_id"]
        resp = client.post(f"/session/{sid}/edge", json={"edge": list(spare)})
        assert resp.status_code == 200
        revised = make_template(t.labels, list(t.edges) + [spare])
        sol = prune(g, revised)
        assert resp.json()["stats"]["vertices"] == sol.n_active
        res = client.get(f"/session/{sid}/result").json()
        assert res["vertices"] == sol.n_active
        assert res["edges"] == sol.m_active
        resp = client.request("DELETE", f"/session/{sid}/edge", json={"edge": list(spare)})
        assert resp.status_code == 200
        base = prune(g, t)
        assert resp.json()["stats"]["vertices"] == base.n_active

    def test_template_echo_round_trips(self, setup):
        g, t, client = setup
        sid = make_session(client, t)["session_id"]
        echoed = client.get(f"/session/{sid}/template").json()["template"]
        assert template_from_json(echoed) == t
        sid2 = make_session(client, template_from_json(echoed))["session_id"]
        assert client.get(f"/session/{sid2}/template").json()["template"] == echoed

    def test_sessions_are_independent(self, setup):
        g, t, client = setup
        spare = next(
            (u, w)
            for u in range(t.n0)
            for w in range(u + 1, t.n0)
            if not t.has_edge(u, w)
        )
        sid_a = make_session(client, t)["session_id"]
        sid_b = make_session(client, t)["session_id"]
        before = client.get(f"/session/{sid_b}/result").json()
        client.post(f"/session/{sid_a}/edge", json={"edge": list(spare)})
        after = client.get(f"/session/{sid_b}/result").json()
        assert before == after
        echo_b = client.get(f"/session/{sid_b}/template").json()["template"]
        assert template_from_json(echo_b) == t

    def test_events_stream_phases_per_revision(self, setup):
        g, t, client = setup
        spare = next(
            (u, w)
            for u in range(t.n0)
            for w in range(u + 1, t.n0)
            if not t.has_edge(u, w)
        )
        sid = make_session(client, t)["session_id"]
        first = client.get(f"/session/{sid}/events").json()
        assert first["events"]
        assert first["events"][0]["phase"] == "lcc"
        assert all(e["revision"] == 0 for e in first["events"])
        client.post(f"/session/{sid}/edge", json={"edge": list(spare)})
        tail = client.get(
            f"/session/{sid}/events", params={"after": first["next"]}
        ).json()
        assert tail["events"]
        assert all(e["revision"] == 1 and e["op"] == "add" for e in tail["events"])
        assert tail["events"][-1]["phase"] == "refine"


class TestErrorPaths:
    def test_disconnected_template_rejected(self, setup):
        _, _, client = setup
        doc = {
            "vertices": [{"id": 0, "label": 0}, {"id": 1, "label": 0}, {"id": 2, "label": 0}],
            "edges": [[0, 1]],
        }
        resp = client.post("/session", json={"template": doc})
        assert resp.status_code == 422
        assert "connected" in resp.json()["detail"]

    def test_disconnecting_removal_rejected_and_session_kept(self, setup):
        g, _, client = setup
        path = make_template([0, 1, 0], [(0, 1), (1, 2)])
        sid = make_session(client, path)["session_id"]
        before = client.get(f"/session/{sid}/result").json()
        resp = client.request("DELETE", f"/session/{sid}/edge", json={"edge": [0, 1]})
        assert resp.status_code == 422
        assert "disconnect" in resp.json()["detail"]
        assert client.get(f"/session/{sid}/result").json() == before

    def test_invalid_edge_edits_rejected(self, setup):
        g, t, client = setup
        sid = make_session(client, t)["session_id"]
        u, w = t.edges[0]
        assert (
            client.post(f"/session/{sid}/edge", json={"edge": [u, w]}).status_code
            == 422
        )
        assert (
            client.post(f"/session/{sid}/edge", json={"edge": [0, 99]}).status_code
            == 422
        )
        assert (
            client.request(
                "DELETE", f"/session/{sid}/edge", json={"edge": [0, 99]}
            ).status_code
            == 422
        )

    def test_malformed_body_rejected(self, setup):
        _, _, client = setup
        assert client.post("/session", json={"template": {"edges": []}}).status_code == 422

    def test_unknown_session_404(self, setup):
        _, _, client = setup
        assert client.get("/session/nope/result").status_code == 404
        assert (
            client.post("/session/nope/edge", json={"edge": [0, 1]}).status_code == 404
        )


class TestExploreEndpoint:
    def test_matches_direct_exploratory_search(self):
        g = build_graph([(0, 1), (1, 2), (0, 2), (2, 3)], 4, labels=[0, 0, 0, 0])
        client = TestClient(create_app(g))
        k4 = make_template([0, 0, 0, 0], list(itertools.combinations(range(4), 2)))
        resp = client.post(
            "/explore", json={"template": template_doc(k4), "max_k": 3}
        )
        assert resp.status_code == 200
        body = resp.json()
        res = exploratory_search(g, k4, 3)
        assert body["found_k"] == res.found_k == 2
        assert [lvl["k"] for lvl in body["levels"]] == [0, 1, 2]
        assert body["levels"][2]["matched_variants"] == 12
        assert body["union_vertices"] == list(res.union_vertices)
        assert body["union_edges"] == [list(e) for e in res.union_edges]

    def test_invalid_template_rejected(self):
        g = build_graph([(0, 1)], 2, labels=[0, 0])
        client = TestClient(create_app(g))
        doc = {"vertices": [{"id": 0, "label": 0}], "edges": [[0, 0]]}
        resp = client.post("/explore", json={"template": doc, "max_k": 1})
        assert resp.status_code == 422


class TestConcurrency:
    def test_racing_edits_serialize_to_a_cold_prune(self):
        g, t = random_instance(InstanceParams(template_size=5, alphabet=2), 7)
        spares = [
            (u, w)
            for u in range(t.n0)
            for w in range(u + 1, t.n0)
            if not t.has_edge(u, w)
        ][:3]
        if len(spares) < 2:
            pytest.skip("template too dense to race edits")
        client = TestClient(create_app(g))
        sid = make_session(client, t)["session_id"]
        failures = []

        def hit(edge):
            try:
                r = client.post(f"/session/{sid}/edge", json={"edge": list(edge)})
                assert r.status_code == 200, r.text
            except AssertionError as exc:  # surfaced after join
                failures.append(exc)

        threads = [threading.Thread(target=hit, args=(e,)) for e in spares]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        assert not failures
        revised = make_template(t.labels, list(t.edges) + spares)
        sol = prune(g, revised)
        res = client.get(f"/session/{sid}/result").json()
        assert res["vertices"] == sol.n_active
        assert res["edges"] == sol.m_active
