"""HTTP service tests: session flows, steering, determinism, idempotency.

A module-scoped fixture trains a tiny pipeline once; each test gets a fresh
app (fresh session store) over those checkpoints.
"""

from __future__ import annotations

import json
from types import SimpleNamespace

import pytest
from fastapi.testclient import TestClient

from scenesketch.cli import main
from scenesketch.service import SCHEMA_VERSION, create_app

TINY = [
    "--config", "composer.train_steps=60",
    "--config", "composer.d_model=16",
    "--config", "composer.n_heads=2",
    "--config", "composer.d_ff=32",
    "--config", "composer.class_lstm_size=8",
    "--config", "sketcher.train_steps=25",
    "--config", "sketcher.hidden_size=24",
    "--config", "corpus.n_layouts=60",
    "--config", "corpus.strokes_per_class=12",
]

DESCRIPTION = "a horse under a tree"


@pytest.fixture(scope="module")
def service_dir(tmp_path_factory):
    base = tmp_path_factory.mktemp("service_pipeline")
    corpus = base / "corpus"
    ckpt = base / "ckpt"
    assert main(["gen-corpus", "--out", str(corpus), *TINY]) == 0
    assert main(["train-composer", "--corpus", str(corpus / "layouts.jsonl"),
                 "--out", str(ckpt), "--seed", "1", *TINY]) == 0
    assert main(["train-sketcher", "--corpus",
                 str(corpus / "strokes_tree.jsonl"), "--label", "tree",
                 "--out", str(ckpt), "--seed", "2", *TINY]) == 0
    assert main(["train-sketcher", "--corpus",
                 str(corpus / "strokes_cloud.jsonl"), "--label", "cloud",
                 "--fallback", "cloud", "--out", str(ckpt),
                 "--seed", "3", *TINY]) == 0
    return ckpt


@pytest.fixture()
def service(service_dir, tmp_path):
    snapshot = tmp_path / "sessions.json"
    app = create_app(service_dir, snapshot_path=snapshot)
    with TestClient(app) as client:
        yield SimpleNamespace(client=client, snapshot=snapshot,
                              state=app.state.service)


def _create(service, description=DESCRIPTION, **extra) -> str:
    resp = service.client.post("/sessions",
                               json={"description": description, **extra})
    assert resp.status_code == 200
    return resp.json()["session_id"]


def _select_first(service, sid: str) -> dict:
    candidates = service.client.get(f"/sessions/{sid}/candidates").json()
    first = candidates["candidates"][0]["candidate_id"]
    resp = service.client.post(f"/sessions/{sid}/select",
                               json={"candidate_id": first})
    assert resp.status_code == 200
    return resp.json()


class TestSessionLifecycle:
    def test_healthz(self, service):
        resp = service.client.get("/healthz")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["schema_version"] == SCHEMA_VERSION
        assert set(body["classes"]) == {"tree", "cloud"}

    def test_create_session(self, service):
        resp = service.client.post("/sessions",
                                   json={"description": DESCRIPTION})
        assert resp.status_code == 200
        body = resp.json()
        assert body["session_id"] == "s000001"
        assert body["description"] == DESCRIPTION

    def test_empty_description_rejected(self, service):
        resp = service.client.post("/sessions", json={"description": "  "})
        assert resp.status_code == 400
        assert "description" in resp.json()["error"]

    def test_unknown_session_is_404(self, service):
        assert service.client.get("/sessions/s999999/candidates")\
            .status_code == 404
        assert service.client.get("/sessions/s999999/render")\
            .status_code == 404


class TestCandidates:
    def test_first_fetch_issues_round_zero(self, service):
        sid = _create(service)
        body = service.client.get(f"/sessions/{sid}/candidates").json()
        assert body["round"] == 0
        assert len(body["candidates"]) == 4
        ids = [c["candidate_id"] for c in body["candidates"]]
        assert ids == ["0-0", "0-1", "0-2", "0-3"]
        for candidate in body["candidates"]:
            assert candidate["layout"]["description"] == DESCRIPTION
            assert "objects" in candidate["preview"]

    def test_k_parameter(self, service):
        sid = _create(service)
        body = service.client.get(f"/sessions/{sid}/candidates?k=2").json()
        assert len(body["candidates"]) == 2

    def test_k_out_of_range_rejected(self, service):
        sid = _create(service)
        assert service.client.get(f"/sessions/{sid}/candidates?k=0")\
            .status_code == 422
        assert service.client.get(f"/sessions/{sid}/candidates?k=17")\
            .status_code == 422

    def test_repeat_fetch_returns_cached_round(self, service):
        sid = _create(service)
        first = service.client.get(f"/sessions/{sid}/candidates").json()
        second = service.client.get(f"/sessions/{sid}/candidates").json()
        assert first == second
        events = [e["event"] for e in service.state.sessions[sid].history]
        assert events.count("candidates") == 1

    def test_selection_opens_next_round(self, service):
        sid = _create(service)
        _select_first(service, sid)
        body = service.client.get(f"/sessions/{sid}/candidates").json()
        assert body["round"] == 1
        assert body["candidates"][0]["candidate_id"] == "1-0"


class TestSelect:
    def test_select_returns_layout_and_seeds(self, service):
        sid = _create(service)
        candidates = service.client.get(f"/sessions/{sid}/candidates").json()
        chosen = candidates["candidates"][1]
        resp = service.client.post(f"/sessions/{sid}/select",
                                   json={"candidate_id":
                                         chosen["candidate_id"]})
        assert resp.status_code == 200
        body = resp.json()
        assert body["selected"] == chosen["layout"]
        assert len(body["object_seeds"]) == len(chosen["layout"]["objects"])

    def test_select_without_round_conflicts(self, service):
        sid = _create(service)
        resp = service.client.post(f"/sessions/{sid}/select",
                                   json={"candidate_id": "0-0"})
        assert resp.status_code == 409

    def test_stale_candidate_conflicts(self, service):
        sid = _create(service)
        _select_first(service, sid)
        # Round 0 is closed; its ids are no longer selectable.
        resp = service.client.post(f"/sessions/{sid}/select",
                                   json={"candidate_id": "0-0"})
        assert resp.status_code == 409

    def test_out_of_range_index_conflicts(self, service):
        sid = _create(service)
        service.client.get(f"/sessions/{sid}/candidates")
        resp = service.client.post(f"/sessions/{sid}/select",
                                   json={"candidate_id": "0-99"})
        assert resp.status_code == 409

    def test_malformed_candidate_id_rejected(self, service):
        sid = _create(service)
        service.client.get(f"/sessions/{sid}/candidates")
        resp = service.client.post(f"/sessions/{sid}/select",
                                   json={"candidate_id": "zero-one"})
        assert resp.status_code == 400


class TestRender:
    def test_render_before_selection_conflicts(self, service):
        sid = _create(service)
        assert service.client.get(f"/sessions/{sid}/render")\
            .status_code == 409
        assert service.client.get(f"/sessions/{sid}/render.json")\
            .status_code == 409

    def test_render_svg(self, service):
        sid = _create(service)
        _select_first(service, sid)
        resp = service.client.get(f"/sessions/{sid}/render")
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("image/svg+xml")
        assert resp.headers["x-schema-version"] == str(SCHEMA_VERSION)
        assert resp.text.startswith("<svg")

    def test_render_is_deterministic(self, service):
        sid = _create(service)
        _select_first(service, sid)
        first = service.client.get(f"/sessions/{sid}/render").content
        second = service.client.get(f"/sessions/{sid}/render").content
        assert first == second

    def test_selected_preview_matches_final_render(self, service):
        sid = _create(service)
        candidates = service.client.get(f"/sessions/{sid}/candidates").json()
        chosen = candidates["candidates"][0]
        service.client.post(f"/sessions/{sid}/select",
                            json={"candidate_id": chosen["candidate_id"]})
        body = service.client.get(f"/sessions/{sid}/render.json").json()
        assert body["scene"]["objects"] == chosen["preview"]["objects"]

    def test_render_json_scene(self, service):
        sid = _create(service)
        selected = _select_first(service, sid)
        body = service.client.get(f"/sessions/{sid}/render.json").json()
        assert body["schema_version"] == SCHEMA_VERSION
        scene = body["scene"]
        assert scene["description"] == DESCRIPTION
        assert len(scene["objects"]) == len(selected["selected"]["objects"])


class TestResketch:
    def test_resketch_before_selection_conflicts(self, service):
        sid = _create(service)
        resp = service.client.post(f"/sessions/{sid}/resketch",
                                   json={"object_index": 0})
        assert resp.status_code == 409

    def test_resketch_changes_one_seed(self, service):
        sid = _create(service)
        selected = _select_first(service, sid)
        if not selected["object_seeds"]:
            pytest.skip("sampled layout had no objects")
        before = selected["object_seeds"]
        resp = service.client.post(f"/sessions/{sid}/resketch",
                                   json={"object_index": 0})
        assert resp.status_code == 200
        after = resp.json()["object_seeds"]
        assert after[0] != before[0]
        assert after[1:] == before[1:]

    def test_resketch_twice_gives_fresh_seeds(self, service):
        sid = _create(service)
        selected = _select_first(service, sid)
        if not selected["object_seeds"]:
            pytest.skip("sampled layout had no objects")
        first = service.client.post(f"/sessions/{sid}/resketch",
                                    json={"object_index": 0}).json()
        second = service.client.post(f"/sessions/{sid}/resketch",
                                     json={"object_index": 0}).json()
        assert first["object_seed"] != second["object_seed"]

    def test_resketch_out_of_range_rejected(self, service):
        sid = _create(service)
        _select_first(service, sid)
        resp = service.client.post(f"/sessions/{sid}/resketch",
                                   json={"object_index": 99})
        assert resp.status_code == 400

    def test_render_after_resketch_is_deterministic(self, service):
        sid = _create(service)
        selected = _select_first(service, sid)
        if not selected["object_seeds"]:
            pytest.skip("sampled layout had no objects")
        service.client.post(f"/sessions/{sid}/resketch",
                            json={"object_index": 0})
        first = service.client.get(f"/sessions/{sid}/render").content
        second = service.client.get(f"/sessions/{sid}/render").content
        assert first == second


class TestReplay:
    def test_replay_matches_render(self, service):
        sid = _create(service)
        selected = _select_first(service, sid)
        if selected["object_seeds"]:
            service.client.post(f"/sessions/{sid}/resketch",
                                json={"object_index": 0})
        live = service.client.get(f"/sessions/{sid}/render").content
        replayed = service.client.get(f"/sessions/{sid}/replay").content
        assert live == replayed

    def test_replay_matches_after_two_rounds(self, service):
        sid = _create(service)
        _select_first(service, sid)
        _select_first(service, sid)  # round 1: re-fetch and re-select
        live = service.client.get(f"/sessions/{sid}/render").content
        replayed = service.client.get(f"/sessions/{sid}/replay").content
        assert live == replayed


class TestAutocomplete:
    BOX = {"class": "tree", "x": 0.5, "y": 0.25, "w": 0.3, "h": 0.4}

    def test_candidates_keep_user_box_verbatim(self, service):
        sid = _create(service)
        resp = service.client.post(f"/sessions/{sid}/autocomplete",
                                   json={"box": self.BOX, "k": 3})
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["candidates"]) == 3
        for candidate in body["candidates"]:
            first = candidate["layout"]["objects"][0]
            assert first["class"] == "tree"
            for key in ("x", "y", "w", "h"):
                assert first[key] == pytest.approx(self.BOX[key], abs=1e-12)

    def test_out_of_canvas_box_rejected_with_hint(self, service):
        sid = _create(service)
        bad = dict(self.BOX, x=1.5)
        resp = service.client.post(f"/sessions/{sid}/autocomplete",
                                   json={"box": bad})
        assert resp.status_code == 400
        assert "unit canvas" in resp.json()["error"]
        assert "hint" in resp.json()

    def test_malformed_box_rejected(self, service):
        sid = _create(service)
        resp = service.client.post(f"/sessions/{sid}/autocomplete",
                                   json={"box": {"class": "tree", "x": 0.5}})
        assert resp.status_code == 400

    def test_unknown_class_rejected_with_hint(self, service):
        sid = _create(service)
        resp = service.client.post(f"/sessions/{sid}/autocomplete",
                                   json={"box": dict(self.BOX,
                                                     **{"class": "zeppelin"})})
        assert resp.status_code == 400
        assert resp.json()["hint"] == "use a class the layout model knows"

    def test_autocomplete_select_render_replay(self, service):
        sid = _create(service)
        body = service.client.post(f"/sessions/{sid}/autocomplete",
                                   json={"box": self.BOX, "k": 2}).json()
        chosen = body["candidates"][0]["candidate_id"]
        resp = service.client.post(f"/sessions/{sid}/select",
                                   json={"candidate_id": chosen})
        assert resp.status_code == 200
        live = service.client.get(f"/sessions/{sid}/render").content
        replayed = service.client.get(f"/sessions/{sid}/replay").content
        assert live == replayed


class TestIdempotency:
    def test_create_session_replays_response(self, service):
        first = service.client.post(
            "/sessions", json={"description": DESCRIPTION,
                               "request_id": "r1"}).json()
        second = service.client.post(
            "/sessions", json={"description": DESCRIPTION,
                               "request_id": "r1"}).json()
        assert first == second
        assert len(service.state.sessions) == 1

    def test_select_retry_does_not_advance_round(self, service):
        sid = _create(service)
        service.client.get(f"/sessions/{sid}/candidates")
        payload = {"candidate_id": "0-0", "request_id": "sel-1"}
        first = service.client.post(f"/sessions/{sid}/select", json=payload)
        second = service.client.post(f"/sessions/{sid}/select", json=payload)
        assert first.status_code == second.status_code == 200
        assert first.json() == second.json()
        assert service.state.sessions[sid].round_counter == 1

    def test_resketch_retry_reuses_seed(self, service):
        sid = _create(service)
        selected = _select_first(service, sid)
        if not selected["object_seeds"]:
            pytest.skip("sampled layout had no objects")
        payload = {"object_index": 0, "request_id": "re-1"}
        first = service.client.post(f"/sessions/{sid}/resketch",
                                    json=payload).json()
        second = service.client.post(f"/sessions/{sid}/resketch",
                                     json=payload).json()
        assert first == second
        assert service.state.sessions[sid].resketch_count == 1


class TestSnapshot:
    def test_snapshot_written_on_mutation(self, service):
        sid = _create(service)
        _select_first(service, sid)
        doc = json.loads(service.snapshot.read_text())
        assert doc["schema_version"] == SCHEMA_VERSION
        assert doc["counter"] == 1
        history = doc["sessions"][sid]["history"]
        assert [e["event"] for e in history] == \
            ["create", "candidates", "select"]

    def test_snapshot_records_autocomplete_box(self, service):
        sid = _create(service)
        box = {"class": "tree", "x": 0.5, "y": 0.25, "w": 0.3, "h": 0.4}
        service.client.post(f"/sessions/{sid}/autocomplete",
                            json={"box": box, "k": 2})
        doc = json.loads(service.snapshot.read_text())
        events = doc["sessions"][sid]["history"]
        assert events[-1]["event"] == "autocomplete"
        assert events[-1]["box"] == box
