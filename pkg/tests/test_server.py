import json

import pytest
from fastapi.testclient import TestClient

from conftest import plant_squares, square_truths
from fishdet.dataset import DatasetManifest, LabeledImage
from fishdet.image import save_image
from fishdet.labels import GroundTruthBox, write_labels
from fishdet.server import ReviewSession, create_app


@pytest.fixture
def review_setup(tmp_path):
    for i in range(3):
        save_image(tmp_path / f"img_{i}.ppm", plant_squares([(0, 0)]))
        (tmp_path / f"img_{i}.txt").write_text(write_labels(square_truths([(0, 0)])))
    manifest = DatasetManifest(
        entries=[LabeledImage(image_path=str(tmp_path / f"img_{i}.ppm"),
                              label_path=str(tmp_path / f"img_{i}.txt"))
                 for i in range(3)],
        summary={"score_histogram": [0] * 9 + [3]},
    )
    manifest_path = tmp_path / "manifest.json"
    manifest.save(manifest_path)
    return tmp_path, manifest_path


@pytest.fixture
def client(review_setup):
    _, manifest_path = review_setup
    session = ReviewSession(manifest_path)
    return TestClient(create_app(session)), session


BOX = {"class_id": 0, "cx": 0.3, "cy": 0.4, "w": 0.1, "h": 0.2}


class TestReads:
    def test_list_images(self, client):
        c, _ = client
        doc = c.get("/images").json()
        assert doc["total"] == 3
        assert doc["images"][0]["state"] == "unreviewed"
        assert doc["images"][0]["revision"] == 1

    def test_list_filtered_and_paged(self, client):
        c, _ = client
        doc = c.get("/images", params={"page": 0, "page_size": 2}).json()
        assert len(doc["images"]) == 2
        doc = c.get("/images", params={"state": "accepted"}).json()
        assert doc["total"] == 0

    def test_raster_bytes(self, client, review_setup):
        tmp_path, _ = review_setup
        c, _ = client
        resp = c.get("/images/0/raster")
        assert resp.status_code == 200
        assert resp.content == (tmp_path / "img_0.ppm").read_bytes()

    def test_get_labels(self, client):
        c, _ = client
        doc = c.get("/images/0/labels").json()
        assert doc["revision"] == 1
        assert len(doc["boxes"]) == 1
        assert doc["boxes"][0]["cx"] == 0.25

    def test_unknown_id(self, client):
        c, _ = client
        assert c.get("/images/99/labels").status_code == 404


class TestWrites:
    def test_put_roundtrips_to_disk(self, client, review_setup):
        tmp_path, _ = review_setup
        c, _ = client
        resp = c.put("/images/0/labels", json={
            "boxes": [BOX], "revision": 1, "state": "corrected"})
        assert resp.status_code == 200
        assert resp.json()["revision"] == 2
        on_disk = (tmp_path / "img_0.txt").read_text()
        assert on_disk == write_labels([GroundTruthBox(0, 0.3, 0.4, 0.1, 0.2)])

    def test_stale_revision_409(self, client):
        c, _ = client
        first = c.put("/images/1/labels", json={
            "boxes": [BOX], "revision": 1, "state": "accepted"})
        assert first.status_code == 200
        stale = c.put("/images/1/labels", json={
            "boxes": [], "revision": 1, "state": "corrected"})
        assert stale.status_code == 409
        retry = c.put("/images/1/labels", json={
            "boxes": [], "revision": first.json()["revision"], "state": "corrected"})
        assert retry.status_code == 200

    def test_invalid_box_422(self, client):
        c, _ = client
        bad = dict(BOX, cx=1.5)
        resp = c.put("/images/0/labels", json={
            "boxes": [bad], "revision": 1, "state": "corrected"})
        assert resp.status_code == 422

    def test_invalid_state_422(self, client):
        c, _ = client
        resp = c.put("/images/0/labels", json={
            "boxes": [BOX], "revision": 1, "state": "unreviewed"})
        assert resp.status_code == 422

    def test_empty_boxes_makes_background(self, client, review_setup):
        tmp_path, _ = review_setup
        c, _ = client
        resp = c.put("/images/2/labels", json={
            "boxes": [], "revision": 1, "state": "corrected"})
        assert resp.status_code == 200
        assert (tmp_path / "img_2.txt").read_text() == ""

    def test_durable_across_restart(self, client, review_setup):
        _, manifest_path = review_setup
        c, _ = client
        c.put("/images/0/labels", json={
            "boxes": [BOX], "revision": 1, "state": "corrected"})
        # a fresh session over the same manifest sees the same state
        fresh = TestClient(create_app(ReviewSession(manifest_path)))
        doc = fresh.get("/images/0/labels").json()
        assert doc["revision"] == 2
        assert doc["state"] == "corrected"
        assert doc["boxes"] == [BOX]

    def test_concurrent_puts_never_interleave(self, review_setup):
        """Parallel saves to different images leave every file whole."""
        import threading

        from fishdet.labels import parse_labels
        from fishdet.server import LabelsPayload

        tmp_path, manifest_path = review_setup
        session = ReviewSession(manifest_path)
        n_rounds = 25

        def hammer(image_id):
            for r in range(n_rounds):
                payload = LabelsPayload(
                    boxes=[{"class_id": 0, "cx": 0.1 * (image_id + 1), "cy": 0.5,
                            "w": 0.05, "h": 0.05}] * (r % 4),
                    revision=r + 1, state="corrected")
                session.save_labels(image_id, payload, reviewer=f"t{image_id}")

        threads = [threading.Thread(target=hammer, args=(i,)) for i in range(3)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for i in range(3):
            boxes = parse_labels((tmp_path / f"img_{i}.txt").read_text())
            assert len(boxes) == (n_rounds - 1) % 4
            assert all(b.cx == pytest.approx(0.1 * (i + 1)) for b in boxes)
            assert session.manifest.entries[i].revision == n_rounds + 1

    def test_audit_log_appends(self, client, review_setup):
        _, manifest_path = review_setup
        c, session = client
        c.put("/images/0/labels", json={"boxes": [BOX], "revision": 1, "state": "accepted"},
              headers={"x-reviewer": "me"})
        c.put("/images/0/labels", json={"boxes": [], "revision": 2, "state": "corrected"})
        lines = [json.loads(l) for l in session.audit_path.read_text().splitlines()]
        assert len(lines) == 2
        assert lines[0]["reviewer"] == "me"
        assert lines[1]["boxes"] == 0


class TestStats:
    def test_counts_by_state(self, client):
        c, _ = client
        c.put("/images/0/labels", json={"boxes": [BOX], "revision": 1, "state": "accepted"})
        c.put("/images/1/labels", json={"boxes": [BOX], "revision": 1, "state": "accepted"})
        c.put("/images/2/labels", json={"boxes": [], "revision": 1, "state": "corrected"})
        stats = c.get("/stats").json()
        assert stats["by_state"] == {"unreviewed": 0, "accepted": 2, "corrected": 1}
        assert stats["score_histogram"][9] == 3

    def test_label_json_text_lossless(self, client, review_setup):
        """API JSON -> label file -> API JSON is identity for 6-decimal boxes."""
        tmp_path, _ = review_setup
        c, _ = client
        boxes = [
            {"class_id": 0, "cx": 0.123456, "cy": 0.654321, "w": 0.111111, "h": 0.222222},
            {"class_id": 1, "cx": 0.5, "cy": 0.5, "w": 0.25, "h": 0.125},
        ]
        c.put("/images/0/labels", json={"boxes": boxes, "revision": 1, "state": "corrected"})
        assert c.get("/images/0/labels").json()["boxes"] == boxes
