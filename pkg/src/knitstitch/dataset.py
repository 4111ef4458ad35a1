"""Corpus manifests, the 7-class label space, stratified splitting, class weights.

A manifest is a plain list of (path, label, source, split) records plus the
seed that produced its split assignment. Splitting operates on sample
identities only, never on pixels, so manifests are cheap to regenerate and
safe to share between processes.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path, PurePosixPath

from knitstitch.errors import CorpusLayoutError, ManifestError, SplitError
from knitstitch.rng import RandomStream

CLASS_NAMES: tuple[str, ...] = (
    "knit_purl",
    "cable",
    "diamond",
    "moss",
    "mesh",
    "motif",
    "tuck",
)
CLASS_INDEX: dict[str, int] = {name: i for i, name in enumerate(CLASS_NAMES)}

SOURCES: tuple[str, ...] = ("real", "synthetic", "scraped")
SPLITS: tuple[str, ...] = ("train", "val", "test")

DEFAULT_RATIOS: tuple[float, float, float] = (0.70, 0.20, 0.10)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg"}


@dataclass(frozen=True)
class ImageSample:
    """One labeled image. ``path`` is relative to the manifest's base directory."""

    path: str
    label: str
    source: str = "real"
    split: str = "unassigned"

    def __post_init__(self):
        if not self.path:
            raise ManifestError("sample path must be nonempty")
        if self.label not in CLASS_INDEX:
            raise ManifestError(
                f"unknown label {self.label!r}; expected one of {', '.join(CLASS_NAMES)}"
            )
        if self.source not in SOURCES:
            raise ManifestError(f"unknown source {self.source!r}")
        if self.split != "unassigned" and self.split not in SPLITS:
            raise ManifestError(f"unknown split {self.split!r}")

    @property
    def label_index(self) -> int:
        return CLASS_INDEX[self.label]


@dataclass(frozen=True)
class DatasetManifest:
    """Ordered, immutable collection of samples plus split bookkeeping.

    ``root`` is the directory sample paths resolve against; it is carried for
    convenience and takes no part in equality or splitting.
    """

    samples: tuple[ImageSample, ...]
    seed: int = 0
    ratios: tuple[float, float, float] | None = None
    root: Path | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        paths = [s.path for s in self.samples]
        if len(set(paths)) != len(paths):
            dupes = sorted({p for p in paths if paths.count(p) > 1})
            raise ManifestError(f"duplicate sample paths in manifest: {dupes[:5]}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def class_counts(self) -> dict[str, int]:
        """Tally of samples per label, recomputed from the sample list."""
        counts: dict[str, int] = {}
        for s in self.samples:
            counts[s.label] = counts.get(s.label, 0) + 1
        return counts

    @property
    def classes(self) -> tuple[str, ...]:
        """Labels present, in canonical index order."""
        present = {s.label for s in self.samples}
        return tuple(name for name in CLASS_NAMES if name in present)

    def subset(self, split: str) -> tuple[ImageSample, ...]:
        if split not in SPLITS and split != "unassigned":
            raise ManifestError(f"unknown split {split!r}")
        return tuple(s for s in self.samples if s.split == split)

    def resolve(self, sample: ImageSample) -> Path:
        base = self.root if self.root is not None else Path(".")
        return base / PurePosixPath(sample.path)


def scan_corpus(root_dir: str | Path, default_source: str = "real") -> DatasetManifest:
    """Build a manifest from a class-per-subdirectory image corpus.

    Every subdirectory of ``root_dir`` must be named after one of the 7
    classes. Images may sit directly in the class directory or one level
    deeper in a provenance directory (``real``, ``synthetic``, ``scraped``);
    otherwise ``default_source`` is recorded. Ordering is lexicographic by
    relative path, so rescanning an unchanged corpus is byte-stable.
    """
    root = Path(root_dir)
    if not root.is_dir():
        raise CorpusLayoutError(f"corpus root {root} is not a directory")

    unknown = [p for p in sorted(root.iterdir()) if p.is_dir() and p.name not in CLASS_INDEX]
    if unknown:
        listing = ", ".join(str(p) for p in unknown)
        raise CorpusLayoutError(f"subdirectories do not match any class name: {listing}")

    samples = []
    for class_dir in sorted(root.iterdir()):
        if not class_dir.is_dir():
            continue
        label = class_dir.name
        for file in sorted(class_dir.rglob("*")):
            if not file.is_file() or file.suffix.lower() not in IMAGE_EXTENSIONS:
                continue
            rel = file.relative_to(root)
            source = default_source
            if len(rel.parts) > 2 and rel.parts[1] in SOURCES:
                source = rel.parts[1]
            samples.append(ImageSample(path=PurePosixPath(rel).as_posix(), label=label, source=source))

    if not samples:
        raise CorpusLayoutError(f"no images found under {root}")

    samples.sort(key=lambda s: s.path)
    return DatasetManifest(samples=tuple(samples), root=root)


def largest_remainder_allocation(n: int, ratios: tuple[float, ...]) -> tuple[int, ...]:
    """Split ``n`` items into integer parts proportional to ``ratios``.

    Floor each exact share, then hand the leftover items to the parts with
    the largest fractional remainders (ties broken by part order). Every
    part ends within 1 of its exact share and the parts sum to ``n``.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"split ratios must sum to 1, got {ratios}")
    exact = [n * r for r in ratios]
    parts = [math.floor(e) for e in exact]
    leftover = n - sum(parts)
    by_remainder = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - parts[i]), i))
    for i in by_remainder[:leftover]:
        parts[i] += 1
    return tuple(parts)


def stratified_split(
    manifest: DatasetManifest,
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> DatasetManifest:
    """Assign every sample to train/val/test, stratified per class.

    Within each class the samples are shuffled by a substream derived from
    (seed, class name) and allocated with floor + largest remainder, so the
    per-class split sizes sit within 1 sample of the exact ratios and the
    whole assignment is a deterministic function of (manifest, seed).
    Existing split fields are ignored: rerunning with the same seed is
    idempotent, a different seed permutes within classes only.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"split ratios must sum to 1, got {ratios}")
    counts = manifest.class_counts
    too_small = sorted(name for name, n in counts.items() if n < 3)
    if too_small:
        raise SplitError(f"classes with fewer than 3 samples cannot be split: {', '.join(too_small)}")

    stream = RandomStream(seed)
    assignment: dict[str, str] = {}
    for label in manifest.classes:
        members = [s.path for s in manifest.samples if s.label == label]
        order = stream.derive(f"split/{label}").permutation(len(members))
        n_train, n_val, _ = largest_remainder_allocation(len(members), ratios)
        for rank, idx in enumerate(order):
            if rank < n_train:
                part = "train"
            elif rank < n_train + n_val:
                part = "val"
            else:
                part = "test"
            assignment[members[idx]] = part

    new_samples = tuple(replace(s, split=assignment[s.path]) for s in manifest.samples)
    return DatasetManifest(samples=new_samples, seed=seed, ratios=tuple(ratios), root=manifest.root)


def balanced_class_weights(counts: dict[str, int]) -> dict[str, float]:
    """Inverse-frequency weights w_c = N / (K * n_c) over a count map.

    Guarantees sum_c n_c * w_c == N, and all weights 1.0 when the counts are
    balanced.
    """
    if not counts:
        raise SplitError("cannot compute class weights from an empty count map")
    bad = sorted(name for name, n in counts.items() if n <= 0)
    if bad:
        raise SplitError(f"classes with zero samples: {', '.join(bad)}")
    total = sum(counts.values())
    k = len(counts)
    return {name: total / (k * n) for name, n in counts.items()}


def compute_class_weights(manifest: DatasetManifest) -> dict[str, float]:
    """Balanced inverse-frequency weights over the training split.

    Every class present in the manifest must appear in the training split.
    """
    train = manifest.subset("train")
    if not train:
        raise SplitError("manifest has no training split; run stratified_split first")
    counts = {label: 0 for label in manifest.classes}
    for s in train:
        counts[s.label] += 1
    empty = sorted(name for name, n in counts.items() if n == 0)
    if empty:
        raise SplitError(f"classes missing from the training split: {', '.join(empty)}")
    return balanced_class_weights(counts)


def stratified_indices(
    labels: list[int],
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> dict[str, list[int]]:
    """Array-level variant of stratified_split over integer labels.

    Returns index lists keyed by split name; used by the estimator facade for
    in-memory (X, y) data.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise SplitError(f"split ratios must sum to 1, got {ratios}")
    stream = RandomStream(seed)
    out: dict[str, list[int]] = {"train": [], "val": [], "test": []}
    for label in sorted(set(labels)):
        members = [i for i, y in enumerate(labels) if y == label]
        order = stream.derive(f"split/{label}").permutation(len(members))
        n_train, n_val, _ = largest_remainder_allocation(len(members), ratios)
        for rank, idx in enumerate(order):
            part = "train" if rank < n_train else ("val" if rank < n_train + n_val else "test")
            out[part].append(members[idx])
    for part in out:
        out[part].sort()
    return out


def write_manifest(manifest: DatasetManifest, csv_path: str | Path) -> None:
    """Write ``path,label,source,split`` CSV plus a ``.meta.json`` sidecar.

    Paths are stored relative to the manifest's directory, POSIX separators,
    UTF-8, LF line endings.
    """
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    base = csv_path.parent.resolve()
    root = manifest.root.resolve() if manifest.root is not None else base

    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "label", "source", "split"])
        for s in manifest.samples:
            absolute = root / PurePosixPath(s.path)
            rel = Path(os.path.relpath(absolute, base)).as_posix()
            writer.writerow([rel, s.label, s.source, s.split])

    meta = {
        "seed": manifest.seed,
        "ratios": list(manifest.ratios) if manifest.ratios is not None else None,
        "class_counts": {name: manifest.class_counts[name] for name in manifest.classes},
    }
    meta_path = csv_path.with_name(csv_path.stem + ".meta.json")
    with open(meta_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(csv_path: str | Path) -> DatasetManifest:
    """Read a manifest CSV (and its sidecar, if present) back into memory."""
    csv_path = Path(csv_path)
    if not csv_path.is_file():
        raise ManifestError(f"manifest file not found: {csv_path}")
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["path", "label", "source", "split"]:
            raise ManifestError(f"unexpected manifest header {header!r} in {csv_path}")
        samples = tuple(
            ImageSample(path=row[0], label=row[1], source=row[2], split=row[3]) for row in reader
        )

    seed, ratios = 0, None
    meta_path = csv_path.with_name(csv_path.stem + ".meta.json")
    if meta_path.is_file():
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        seed = int(meta.get("seed", 0))
        if meta.get("ratios") is not None:
            ratios = tuple(meta["ratios"])

    return DatasetManifest(samples=samples, seed=seed, ratios=ratios, root=csv_path.parent)
