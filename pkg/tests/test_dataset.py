import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knitstitch.dataset import (
    CLASS_NAMES,
    DatasetManifest,
    ImageSample,
    balanced_class_weights,
    compute_class_weights,
    largest_remainder_allocation,
    load_manifest,
    scan_corpus,
    stratified_indices,
    stratified_split,
    write_manifest,
)
from knitstitch.errors import CorpusLayoutError, ManifestError, SplitError

from conftest import make_corpus, write_png

RATIOS = (0.70, 0.20, 0.10)


def alloc_oracle(n, ratios=RATIOS):
    """Independent floor + largest-remainder allocation."""
    exact = [n * r for r in ratios]
    parts = [math.floor(e) for e in exact]
    leftover = n - sum(parts)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - parts[i]), i))
    for i in order[:leftover]:
        parts[i] += 1
    return tuple(parts)


def synthetic_manifest(counts, prefix="img"):
    samples = []
    for label, n in counts.items():
        for i in range(n):
            samples.append(ImageSample(path=f"{label}/{prefix}_{i:05d}.png", label=label))
    return DatasetManifest(samples=tuple(samples))


class TestScanCorpus:
    def test_counts_tiny_corpus(self, tmp_path):
        root = make_corpus(tmp_path / "c", {"cable": 2, "moss": 1})
        manifest = scan_corpus(root)
        assert len(manifest) == 3
        assert manifest.class_counts == {"cable": 2, "moss": 1}
        assert all(s.split == "unassigned" for s in manifest.samples)

    def test_unknown_subdirectory_rejected(self, tmp_path):
        root = make_corpus(tmp_path / "c", {"cable": 2})
        (root / "ribbing").mkdir()
        write_png(root / "ribbing" / "a.png", np.zeros((4, 4, 3)))
        with pytest.raises(CorpusLayoutError, match="ribbing"):
            scan_corpus(root)

    def test_empty_corpus_rejected(self, tmp_path):
        root = tmp_path / "c"
        (root / "cable").mkdir(parents=True)
        with pytest.raises(CorpusLayoutError):
            scan_corpus(root)

    def test_ordering_is_lexicographic_and_stable(self, tiny_corpus):
        m1 = scan_corpus(tiny_corpus)
        m2 = scan_corpus(tiny_corpus)
        assert m1.samples == m2.samples
        paths = [s.path for s in m1.samples]
        assert paths == sorted(paths)

    def test_source_from_provenance_subdirectory(self, tmp_path):
        root = tmp_path / "c"
        write_png(root / "cable" / "synthetic" / "a.png", np.zeros((4, 4, 3)))
        write_png(root / "cable" / "b.png", np.zeros((4, 4, 3)))
        manifest = scan_corpus(root)
        by_path = {s.path: s.source for s in manifest.samples}
        assert by_path["cable/synthetic/a.png"] == "synthetic"
        assert by_path["cable/b.png"] == "real"

    def test_full_corpus_size(self, tmp_path):
        # 13,235 images split over the 7 classes; one encoded PNG reused
        import io

        from PIL import Image

        counts = dict(zip(CLASS_NAMES, (3200, 2800, 2400, 1900, 1500, 1100, 335)))
        assert sum(counts.values()) == 13235
        buf = io.BytesIO()
        Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(buf, format="PNG")
        payload = buf.getvalue()
        root = tmp_path / "full"
        for label, n in counts.items():
            d = root / label
            d.mkdir(parents=True)
            for i in range(n):
                (d / f"{i:05d}.png").write_bytes(payload)
        manifest = scan_corpus(root)
        assert len(manifest) == 13235
        assert manifest.class_counts == counts


class TestStratifiedSplit:
    def test_exact_ratios_100(self):
        manifest = synthetic_manifest({"cable": 100})
        out = stratified_split(manifest, RATIOS, seed=1)
        sizes = {part: len(out.subset(part)) for part in ("train", "val", "test")}
        assert sizes == {"train": 70, "val": 20, "test": 10}

    def test_exact_ratios_10(self):
        manifest = synthetic_manifest({"moss": 10})
        out = stratified_split(manifest, RATIOS, seed=1)
        sizes = {part: len(out.subset(part)) for part in ("train", "val", "test")}
        assert sizes == {"train": 7, "val": 2, "test": 1}

    def test_full_corpus_golden_totals(self):
        # frozen output of the allocator on a 13,235-sample manifest
        counts = dict(zip(CLASS_NAMES, (3200, 2800, 2400, 1900, 1500, 1100, 335)))
        manifest = synthetic_manifest(counts)
        out = stratified_split(manifest, RATIOS, seed=0)
        totals = {part: len(out.subset(part)) for part in ("train", "val", "test")}
        assert totals == {"train": 9264, "val": 2647, "test": 1324}
        assert abs(totals["train"] - 13235 * 0.7) <= 7
        assert abs(totals["val"] - 13235 * 0.2) <= 7
        assert abs(totals["test"] - 13235 * 0.1) <= 7

    def test_matches_allocation_oracle_per_class(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            counts = {name: int(rng.integers(3, 400)) for name in CLASS_NAMES}
            out = stratified_split(synthetic_manifest(counts), RATIOS, seed=3)
            for name, n in counts.items():
                got = tuple(
                    sum(1 for s in out.samples if s.label == name and s.split == part)
                    for part in ("train", "val", "test")
                )
                assert got == alloc_oracle(n)

    def test_deterministic_and_idempotent(self):
        manifest = synthetic_manifest({"cable": 37, "moss": 12, "tuck": 5})
        a = stratified_split(manifest, RATIOS, seed=11)
        b = stratified_split(manifest, RATIOS, seed=11)
        assert a.samples == b.samples
        again = stratified_split(a, RATIOS, seed=11)
        assert again.samples == a.samples

    def test_seed_changes_assignment_not_sizes(self):
        manifest = synthetic_manifest({"cable": 40, "moss": 40})
        a = stratified_split(manifest, RATIOS, seed=0)
        b = stratified_split(manifest, RATIOS, seed=1)
        assert a.samples != b.samples
        for part in ("train", "val", "test"):
            assert len(a.subset(part)) == len(b.subset(part))

    def test_union_and_disjointness(self):
        manifest = synthetic_manifest({"cable": 23, "mesh": 9})
        out = stratified_split(manifest, RATIOS, seed=2)
        parts = [set(s.path for s in out.subset(p)) for p in ("train", "val", "test")]
        assert sum(len(p) for p in parts) == len(manifest)
        assert set.union(*parts) == {s.path for s in manifest.samples}

    def test_small_class_rejected_by_name(self):
        manifest = synthetic_manifest({"cable": 10, "tuck": 2})
        with pytest.raises(SplitError, match="tuck"):
            stratified_split(manifest, RATIOS, seed=0)

    def test_bad_ratios_rejected(self):
        manifest = synthetic_manifest({"cable": 10})
        with pytest.raises(SplitError):
            stratified_split(manifest, (0.5, 0.2, 0.2), seed=0)

    def test_stratified_indices_agrees_with_allocator(self):
        labels = [0] * 25 + [1] * 10 + [2] * 7
        idx = stratified_indices(labels, RATIOS, seed=5)
        all_idx = sorted(idx["train"] + idx["val"] + idx["test"])
        assert all_idx == list(range(len(labels)))
        for label, n in ((0, 25), (1, 10), (2, 7)):
            got = tuple(
                sum(1 for i in idx[part] if labels[i] == label) for part in ("train", "val", "test")
            )
            assert got == alloc_oracle(n)


class TestClassWeights:
    def test_balanced_counts_give_unit_weights(self):
        counts = {name: 12 for name in CLASS_NAMES}
        weights = balanced_class_weights(counts)
        assert all(w == 1.0 for w in weights.values())

    def test_worked_example(self):
        weights = balanced_class_weights({"A": 100, "B": 50, "C": 50})
        assert weights["A"] == pytest.approx(200 / (3 * 100))
        assert weights["B"] == pytest.approx(200 / (3 * 50))
        assert weights["C"] == pytest.approx(200 / (3 * 50))
        total = 100 * weights["A"] + 50 * weights["B"] + 50 * weights["C"]
        assert total == pytest.approx(200, rel=1e-12)

    def test_two_singletons(self):
        assert balanced_class_weights({"A": 1, "B": 1}) == {"A": 1.0, "B": 1.0}

    @given(
        st.lists(st.integers(min_value=1, max_value=5000), min_size=1, max_size=7),
    )
    @settings(max_examples=200, deadline=None)
    def test_weight_identity_property(self, counts):
        named = {f"c{i}": n for i, n in enumerate(counts)}
        weights = balanced_class_weights(named)
        total = sum(named[k] * weights[k] for k in named)
        n = sum(counts)
        assert abs(total - n) <= 1e-9 * n
        assert all(w > 0 for w in weights.values())

    def test_weights_from_split_manifest(self):
        manifest = stratified_split(synthetic_manifest({"cable": 50, "moss": 10}), RATIOS, seed=0)
        weights = compute_class_weights(manifest)
        train_counts = {"cable": 35, "moss": 7}
        n = 42
        assert weights["cable"] == pytest.approx(n / (2 * train_counts["cable"]))
        assert weights["moss"] == pytest.approx(n / (2 * train_counts["moss"]))

    def test_unsplit_manifest_rejected(self):
        with pytest.raises(SplitError):
            compute_class_weights(synthetic_manifest({"cable": 5}))

    def test_zero_count_rejected(self):
        with pytest.raises(SplitError, match="B"):
            balanced_class_weights({"A": 3, "B": 0})


class TestAllocator:
    def test_deviation_at_most_one(self):
        for n in range(3, 800):
            parts = largest_remainder_allocation(n, RATIOS)
            assert sum(parts) == n
            for part, ratio in zip(parts, RATIOS):
                assert abs(part - n * ratio) <= 1.0

    def test_agrees_with_oracle(self):
        for n in range(3, 3000, 7):
            assert largest_remainder_allocation(n, RATIOS) == alloc_oracle(n)


class TestManifestIO:
    def test_roundtrip_identity(self, tiny_corpus):
        manifest = stratified_split(scan_corpus(tiny_corpus), RATIOS, seed=9)
        csv_path = tiny_corpus / "manifest.csv"
        write_manifest(manifest, csv_path)
        loaded = load_manifest(csv_path)
        assert loaded.samples == manifest.samples
        assert loaded.seed == manifest.seed
        assert loaded.ratios == manifest.ratios

    def test_scan_write_load_scan_identity(self, tiny_corpus):
        manifest = scan_corpus(tiny_corpus)
        csv_path = tiny_corpus / "manifest.csv"
        write_manifest(manifest, csv_path)
        assert load_manifest(csv_path).samples == manifest.samples

    def test_file_format(self, tiny_corpus):
        manifest = scan_corpus(tiny_corpus)
        csv_path = tiny_corpus / "manifest.csv"
        write_manifest(manifest, csv_path)
        raw = csv_path.read_bytes()
        assert b"\r" not in raw
        first = raw.split(b"\n", 1)[0]
        assert first == b"path,label,source,split"
        meta = csv_path.with_name("manifest.meta.json")
        assert meta.is_file()

    def test_rewrite_is_byte_identical(self, tiny_corpus):
        manifest = scan_corpus(tiny_corpus)
        csv_path = tiny_corpus / "manifest.csv"
        write_manifest(manifest, csv_path)
        first = csv_path.read_bytes()
        write_manifest(manifest, csv_path)
        assert csv_path.read_bytes() == first

    def test_duplicate_paths_rejected(self):
        samples = (
            ImageSample(path="cable/a.png", label="cable"),
            ImageSample(path="cable/a.png", label="cable"),
        )
        with pytest.raises(ManifestError, match="duplicate"):
            DatasetManifest(samples=samples)

    def test_unknown_label_rejected(self):
        with pytest.raises(ManifestError, match="ribbing"):
            ImageSample(path="x.png", label="ribbing")
