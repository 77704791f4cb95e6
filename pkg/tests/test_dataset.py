import numpy as np
import pytest

from conftest import plant_squares, square_truths
from fishdet.dataset import (
    DatasetManifest,
    LabeledImage,
    detections_to_labels,
    evaluate_dataset,
    find_images,
    pseudo_label,
    split_dataset,
)
from fishdet.errors import EmptyDataset, MissingLabelFile
from fishdet.image import save_image
from fishdet.labels import GroundTruthBox, parse_labels, write_labels


def entries(n):
    return [LabeledImage(image_path=f"img_{i:04d}.ppm", label_path=f"img_{i:04d}.txt")
            for i in range(n)]


class TestSplit:
    def test_paper_ratio(self):
        manifest = split_dataset(entries(510), 0.1, seed=42)
        counts = {"train": 0, "test": 0}
        for e in manifest.entries:
            counts[e.split] += 1
        assert counts == {"train": 459, "test": 51}

    def test_single_item_keeps_training(self):
        manifest = split_dataset(entries(1), 0.1, seed=0)
        assert [e.split for e in manifest.entries] == ["train"]

    def test_deterministic_under_seed(self):
        a = split_dataset(entries(100), 0.2, seed=7)
        b = split_dataset(entries(100), 0.2, seed=7)
        assert [(e.image_path, e.split) for e in a.entries] == \
               [(e.image_path, e.split) for e in b.entries]

    def test_different_seeds_differ(self):
        a = split_dataset(entries(100), 0.2, seed=1)
        b = split_dataset(entries(100), 0.2, seed=2)
        assert [(e.image_path, e.split) for e in a.entries] != \
               [(e.image_path, e.split) for e in b.entries]

    def test_partition(self):
        base = entries(37)
        manifest = split_dataset(base, 0.25, seed=3)
        names = sorted(e.image_path for e in manifest.entries)
        assert names == sorted(e.image_path for e in base)
        assert all(e.split in ("train", "test") for e in manifest.entries)

    def test_empty_rejected(self):
        with pytest.raises(EmptyDataset):
            split_dataset([], 0.1, seed=0)


def test_manifest_roundtrip(tmp_path):
    manifest = split_dataset(entries(10), 0.2, seed=5)
    manifest.summary = {"boxes": 3}
    path = tmp_path / "manifest.json"
    manifest.save(path)
    loaded = DatasetManifest.load(path)
    assert loaded.entries == manifest.entries
    assert loaded.seed == 5
    assert loaded.summary == {"boxes": 3}


def test_detections_to_labels_normalizes():
    from fishdet.boxes import Detection
    d = Detection(cx=32, cy=16, w=16, h=8, objectness=0.9,
                  class_probs=np.array([0.9]), class_id=0, score=0.81)
    (box,) = detections_to_labels([d], img_w=64, img_h=32)
    assert (box.cx, box.cy, box.w, box.h) == (0.5, 0.5, 0.25, 0.25)


@pytest.fixture
def square_dir(tmp_path):
    cells = [[(0, 0)], [(1, 1), (0, 1)], []]
    for i, cc in enumerate(cells):
        save_image(tmp_path / f"img_{i}.ppm", plant_squares(cc))
    return tmp_path, cells


class TestPseudoLabel:
    def test_writes_one_label_per_image(self, squarenet, square_dir):
        tmp_path, cells = square_dir
        manifest = pseudo_label(squarenet, tmp_path)
        assert manifest.summary["images"] == 3
        assert manifest.summary["boxes"] == 3
        for i, cc in enumerate(cells):
            boxes = parse_labels((tmp_path / f"img_{i}.txt").read_text())
            assert len(boxes) == len(cc)

    def test_background_images_get_empty_files(self, squarenet, square_dir):
        tmp_path, _ = square_dir
        pseudo_label(squarenet, tmp_path)
        assert (tmp_path / "img_2.txt").read_text() == ""

    def test_entries_unreviewed(self, squarenet, square_dir):
        tmp_path, _ = square_dir
        manifest = pseudo_label(squarenet, tmp_path)
        assert all(e.state == "unreviewed" for e in manifest.entries)

    def test_unreadable_image_skipped(self, squarenet, square_dir):
        tmp_path, _ = square_dir
        (tmp_path / "img_9.ppm").write_bytes(b"P6\nnot really\n")
        manifest = pseudo_label(squarenet, tmp_path)
        assert manifest.summary["images"] == 3
        assert len(manifest.summary["skipped"]) == 1

    def test_score_histogram(self, squarenet, square_dir):
        tmp_path, _ = square_dir
        manifest = pseudo_label(squarenet, tmp_path)
        hist = manifest.summary["score_histogram"]
        assert sum(hist) == 3
        assert hist[9] == 3  # all fixture scores ~0.987

    def test_empty_dir_rejected(self, squarenet, tmp_path):
        with pytest.raises(EmptyDataset):
            pseudo_label(squarenet, tmp_path)

    def test_parallel_matches_serial(self, squarenet, square_dir):
        tmp_path, _ = square_dir
        serial = pseudo_label(squarenet, tmp_path, workers=1)
        parallel = pseudo_label(squarenet, tmp_path, workers=4)
        assert [e.image_path for e in serial.entries] == \
               [e.image_path for e in parallel.entries]
        assert serial.summary == parallel.summary


class TestEvaluate:
    def test_perfect_detector(self, squarenet, square_dir):
        tmp_path, cells = square_dir
        for i, cc in enumerate(cells):
            (tmp_path / f"img_{i}.txt").write_text(write_labels(square_truths(cc)))
        manifest = DatasetManifest(entries=[
            LabeledImage(image_path=str(tmp_path / f"img_{i}.ppm"),
                         label_path=str(tmp_path / f"img_{i}.txt"))
            for i in range(3)
        ])
        report = evaluate_dataset(squarenet, manifest)
        assert report.mean_ap == 1.0
        assert report.f1 == 1.0
        assert report.precision == 1.0 and report.recall == 1.0
        assert report.counts.tp == 3 and report.counts.fp == 0

    def test_detector_emitting_nothing(self, squarenet, square_dir):
        tmp_path, cells = square_dir
        for i, cc in enumerate(cells):
            (tmp_path / f"img_{i}.txt").write_text(write_labels(square_truths(cc)))
        manifest = DatasetManifest(entries=[
            LabeledImage(image_path=str(tmp_path / f"img_{i}.ppm"),
                         label_path=str(tmp_path / f"img_{i}.txt"))
            for i in range(3)
        ])
        # a threshold no detection reaches
        report = evaluate_dataset(squarenet, manifest, conf_threshold=0.999)
        assert report.recall == 0.0
        assert report.counts.fn == 3

    def test_hand_built_three_image_report(self, squarenet, square_dir):
        """One perfect image, one with a missed truth, one background:
        counts traced by hand."""
        tmp_path, _ = square_dir
        # img_0 truth matches its detection; img_1 gets one extra truth
        # nothing detects; img_2 stays background
        (tmp_path / "img_0.txt").write_text(write_labels(square_truths([(0, 0)])))
        (tmp_path / "img_1.txt").write_text(
            write_labels(square_truths([(1, 1), (0, 1)]) +
                         [GroundTruthBox(0, 0.5, 0.1, 0.05, 0.05)]))
        (tmp_path / "img_2.txt").write_text("")
        manifest = DatasetManifest(entries=[
            LabeledImage(image_path=str(tmp_path / f"img_{i}.ppm"),
                         label_path=str(tmp_path / f"img_{i}.txt"))
            for i in range(3)
        ])
        report = evaluate_dataset(squarenet, manifest)
        # detections: 3 total, all TP; truths: 4 -> one FN
        assert report.counts.tp == 3
        assert report.counts.fp == 0
        assert report.counts.fn == 1
        assert report.precision == 1.0
        assert report.recall == pytest.approx(0.75)
        assert report.f1 == pytest.approx(2 * 1.0 * 0.75 / 1.75)
        # AP: 3 TPs over 4 truths, recall tops out at 0.75
        assert report.mean_ap == pytest.approx(0.75)

    def test_missing_label_file(self, squarenet, square_dir):
        tmp_path, _ = square_dir
        manifest = DatasetManifest(entries=[
            LabeledImage(image_path=str(tmp_path / "img_0.ppm"),
                         label_path=str(tmp_path / "nope.txt"))
        ])
        with pytest.raises(MissingLabelFile):
            evaluate_dataset(squarenet, manifest)

    def test_self_consistency_with_pseudo_labels(self, squarenet, square_dir):
        tmp_path, _ = square_dir
        manifest = pseudo_label(squarenet, tmp_path, conf_threshold=0.25)
        report = evaluate_dataset(squarenet, manifest, conf_threshold=0.25)
        assert report.precision == 1.0
        assert report.recall == 1.0


def test_find_images_sorted_and_filtered(tmp_path):
    for name in ("b.ppm", "a.ppm", "c.txt", "d.png"):
        (tmp_path / name).write_bytes(b"")
    found = [p.name for p in find_images(tmp_path)]
    assert found == ["a.ppm", "b.ppm", "d.png"]
