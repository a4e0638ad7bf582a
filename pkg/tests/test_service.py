"""HTTP service endpoints, caching, and parity with the CLI renderer."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from fsr import cli
from fsr.images import decode_png16, decode_png16_indices
from fsr.representation import deserialize
from fsr.service import create_app


@pytest.fixture(scope="module")
def rep(container_dir):
    return deserialize(container_dir)


@pytest.fixture(scope="module")
def app(container_dir):
    return create_app(container_dir)


@pytest.fixture(scope="module")
def client(app):
    return TestClient(app)


class TestInfo:
    def test_reports_container_shape(self, client, rep):
        data = client.get("/info").json()
        assert data["k"] == rep.k
        assert data["width"] == rep.width
        assert data["height"] == rep.height
        assert data["labels"] == sorted(int(v) for v in np.unique(rep.focusmap.index))
        assert data["dual_count"] == rep.dual.count
        assert data["bokeh_count"] == rep.bokeh.count


class TestMaps:
    def test_focus_map_png_round_trips(self, client, rep):
        resp = client.get("/map/focus")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert np.array_equal(decode_png16_indices(resp.content), rep.focusmap.index)

    def test_slice_preview_is_composite(self, client, rep):
        resp = client.get("/slice/preview")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "image/png"
        assert np.array_equal(decode_png16(resp.content), rep.focusmap.image)

    def test_dual_map_is_shifted_index(self, client, rep):
        resp = client.get("/map/dual")
        assert resp.status_code == 200
        decoded = decode_png16_indices(resp.content)
        assert np.array_equal(decoded, rep.dual.index + 1)
        assert (decoded > 0).sum() == rep.dual.count

    def test_bokeh_map_is_mask(self, client, rep):
        resp = client.get("/map/bokeh")
        assert resp.status_code == 200
        decoded = decode_png16_indices(resp.content)
        assert np.array_equal(decoded > 0, rep.bokeh.mask)


class TestRefocusEndpoint:
    def test_point_matches_cli_slice_render(self, client, rep, container_dir, tmp_path, capsys):
        x, y = 10, 10
        label = int(rep.focusmap.index[y, x])
        resp = client.post(
            "/refocus", json={"mode": "point", "point": {"x": x, "y": y, "spread": 0}}
        )
        assert resp.status_code == 200
        out = tmp_path / "cli.png"
        assert cli.main(["refocus", str(container_dir), str(out), "--slice", str(label)]) == 0
        capsys.readouterr()
        assert resp.content == out.read_bytes()

    def test_full_spread_equals_all_in_focus(self, client, rep, container_dir, tmp_path, capsys):
        resp = client.post(
            "/refocus",
            json={"mode": "point", "point": {"x": 3, "y": 3, "spread": rep.k - 1}},
        )
        aif = client.post("/refocus", json={"mode": "all-in-focus"})
        assert resp.content == aif.content
        out = tmp_path / "aif.png"
        assert cli.main(["refocus", str(container_dir), str(out), "--aif"]) == 0
        capsys.readouterr()
        assert resp.content == out.read_bytes()

    def test_equal_label_sets_share_bytes(self, client, rep):
        x, y = 40, 40
        label = int(rep.focusmap.index[y, x])
        by_point = client.post(
            "/refocus", json={"mode": "point", "point": {"x": x, "y": y, "spread": 0}}
        )
        by_single = client.post("/refocus", json={"mode": "single", "label": label})
        by_range = client.post("/refocus", json={"mode": "extended", "range": [label, label]})
        assert by_point.content == by_single.content == by_range.content

    def test_npr_sparse_labels_render(self, client, rep):
        resp = client.post("/refocus", json={"mode": "npr", "labels": [0, rep.k - 1]})
        assert resp.status_code == 200
        img = decode_png16(resp.content)
        assert img.shape == (rep.height, rep.width, 3)

    def test_repeat_posts_hit_cache(self, client, app):
        spec = {"mode": "extended", "range": [1, 2]}
        first = client.post("/refocus", json=spec)
        before = dict(app.state.render_cache)
        second = client.post("/refocus", json=spec)
        assert first.content == second.content
        assert dict(app.state.render_cache) == before

    def test_cache_evicts_beyond_capacity(self, client, app, rep):
        specs = [
            {"mode": "extended", "range": [lo, hi]}
            for lo in range(rep.k)
            for hi in range(lo, rep.k)
        ]
        assert len(specs) > 16
        for spec in specs:
            assert client.post("/refocus", json=spec).status_code == 200
        assert len(app.state.render_cache) == 16


class TestRefocusErrors:
    @pytest.mark.parametrize(
        "spec",
        [
            {"mode": "nonsense"},
            {"labels": [1]},
            {"mode": "single"},
            {"mode": "extended", "range": [1]},
            {"mode": "point", "point": {"x": 9999, "y": 0, "spread": 0}},
            {"mode": "point", "point": {"x": 0, "y": 0, "spread": -1}},
            {"mode": "point", "point": {"x": "a", "y": 0}},
            {"mode": "single", "label": 1, "version": 99},
        ],
    )
    def test_malformed_specs_are_400(self, client, spec):
        assert client.post("/refocus", json=spec).status_code == 400

    def test_non_json_body_is_400(self, client):
        resp = client.post(
            "/refocus", content=b"junk", headers={"content-type": "application/json"}
        )
        assert resp.status_code == 400

    @pytest.mark.parametrize(
        "spec",
        [
            {"mode": "single", "label": 99},
            {"mode": "single", "label": -1},
            {"mode": "extended", "range": [1, 99]},
            {"mode": "npr", "labels": []},
            {"mode": "extended", "labels": [0, 2]},
        ],
    )
    def test_unrenderable_targets_are_422(self, client, spec):
        assert client.post("/refocus", json=spec).status_code == 422


class TestStaticFrontend:
    def test_mounted_directory_served_at_root(self, container_dir, tmp_path):
        (tmp_path / "index.html").write_text("<!doctype html><title>fsr</title>")
        app = create_app(container_dir, frontend=tmp_path)
        client = TestClient(app)
        resp = client.get("/")
        assert resp.status_code == 200
        assert "fsr" in resp.text
        assert client.get("/info").status_code == 200
