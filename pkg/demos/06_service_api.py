"""
Driving the session service over HTTP
=====================================

The service wraps interactive sessions in a JSON API, one session per
template-editing conversation. Here we exercise it in-process through an
ASGI test client; `prunematch serve` exposes the same app over a socket.
"""

import numpy as np
from fastapi.testclient import TestClient

from prunematch import PruneConfig, build_graph
from prunematch.service import create_app

g = build_graph(
    np.array([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 2)], dtype=np.int64),
    5,
    np.array([0, 0, 0, 0, 0], dtype=np.int64),
)
client = TestClient(create_app(g, PruneConfig()))

r = client.post("/session", json={"template": {
    "vertices": [{"id": 0, "label": 0}, {"id": 1, "label": 0},
                 {"id": 2, "label": 0}],
    "edges": [[0, 1], [1, 2], [0, 2]],
}})
sid = r.json()["session_id"]
print("opened session", sid)
print("initial result:", client.get(f"/session/{sid}/result").json())

# Edits go through validated endpoints; an illegal one is refused whole.
r = client.post(f"/session/{sid}/edge", json={"edge": [0, 1]})
print("duplicate edge add ->", r.status_code, r.json()["detail"])

r = client.request("DELETE", f"/session/{sid}/edge", json={"edge": [0, 2]})
print("after removing q0-q2:", client.get(f"/session/{sid}/result").json())

events = client.get(f"/session/{sid}/events").json()
revisions = {e["revision"] for e in events["events"]}
print(f"{len(events['events'])} phase events across "
      f"{len(revisions)} revisions")

# The canonical template echo re-posts to an identical session.
echoed = client.get(f"/session/{sid}/template").json()["template"]
r = client.post("/session", json={"template": echoed})
print("echo round-trip opened twin session", r.json()["session_id"])
