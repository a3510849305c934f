"""Dataset ingestion, deterministic stratified splitting, and batching.

The on-disk layout is one immediate subdirectory per class under a root;
class order is lexicographic by UTF-8 byte value and files are sorted by
name, so a rescan of the same tree always yields the same dataset. The
split manifest is a plain text file (``path,class,split`` header, LF
endings, rows sorted by class then filename) and is byte-identical for
identical (dataset, seed).
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .images import sniff_format
from .tensor import Rng

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")

# stream tokens for Rng.derive, so the split/shuffle/augment/init streams
# never collide even for equal (seed, index) pairs
STREAM_SPLIT = 1
STREAM_SHUFFLE = 2
STREAM_AUGMENT = 3
STREAM_INIT = 4


@dataclass(frozen=True)
class Sample:
    path: str          # relative to the dataset root
    class_index: int


@dataclass
class Dataset:
    root: str
    class_names: tuple[str, ...]
    samples: tuple[Sample, ...]
    skipped: tuple[str, ...] = ()

    def full_path(self, sample: Sample) -> str:
        return os.path.join(self.root, sample.path)


@dataclass
class SplitManifest:
    seed: int
    assignments: tuple[str, ...]   # one of SPLITS per sample, dataset order

    def indices(self, split: str) -> list[int]:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return [i for i, s in enumerate(self.assignments) if s == split]


def scan_dataset(root: str) -> Dataset:
    """One class per immediate subdirectory; undecodable files are skipped
    with a warning and reported in ``Dataset.skipped``."""
    if not os.path.isdir(root):
        raise DataError(f"dataset root {root!r} is not a directory")
    class_dirs = sorted(
        (e for e in os.scandir(root) if e.is_dir()),
        key=lambda e: e.name.encode("utf-8"))
    if not class_dirs:
        raise DataError(f"dataset root {root!r} contains no class directories")
    class_names = tuple(e.name for e in class_dirs)
    samples: list[Sample] = []
    skipped: list[str] = []
    for ci, entry in enumerate(class_dirs):
        for fname in sorted(os.listdir(entry.path)):
            rel = os.path.join(entry.name, fname)
            full = os.path.join(root, rel)
            if not os.path.isfile(full):
                continue
            if sniff_format(full) is None:
                logger.warning("skipping undecodable file %s", rel)
                skipped.append(rel)
                continue
            samples.append(Sample(rel, ci))
    if not samples:
        raise DataError(f"dataset root {root!r} contains no decodable images")
    return Dataset(root, class_names, tuple(samples), tuple(skipped))


def stratified_split(ds: Dataset, seed: int) -> SplitManifest:
    """Per class: shuffle, first floor(0.1n) to test, next floor(0.1n) to
    val, remainder to train. Invariant to scan order by construction."""
    assignments = ["train"] * len(ds.samples)
    master = Rng(seed)
    by_class: dict[int, list[int]] = {}
    for i, s in enumerate(ds.samples):
        by_class.setdefault(s.class_index, []).append(i)
    for ci, idxs in sorted(by_class.items()):
        order = master.derive(STREAM_SPLIT, ci).permutation(len(idxs))
        tenth = len(idxs) // 10
        for pos, j in enumerate(order):
            if pos < tenth:
                assignments[idxs[j]] = "test"
            elif pos < 2 * tenth:
                assignments[idxs[j]] = "val"
    return SplitManifest(seed, tuple(assignments))


def split_counts(ds: Dataset, manifest: SplitManifest) -> dict[str, dict[str, int]]:
    """Per-class sample counts per split."""
    counts = {name: {s: 0 for s in SPLITS} for name in ds.class_names}
    for sample, assigned in zip(ds.samples, manifest.assignments):
        counts[ds.class_names[sample.class_index]][assigned] += 1
    return counts


def save_manifest(ds: Dataset, manifest: SplitManifest, path: str) -> None:
    """Text manifest: ``path,class,split`` rows in (class, filename) order."""
    rows = sorted(
        zip(ds.samples, manifest.assignments),
        key=lambda r: (r[0].class_index, r[0].path))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# seed={manifest.seed}\n")
        f.write("path,class,split\n")
        for sample, assigned in rows:
            name = ds.class_names[sample.class_index]
            f.write(f"{sample.path.replace(os.sep, '/')},{name},{assigned}\n")


def load_manifest(path: str, root: str) -> tuple[Dataset, SplitManifest]:
    """Rebuild (Dataset, SplitManifest) from a saved manifest file."""
    if not os.path.isfile(path):
        raise DataError(f"no such manifest file: {path}")
    seed = 0
    rows: list[tuple[str, str, str]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                if "seed=" in line:
                    seed = int(line.split("seed=", 1)[1])
                continue
            if line == "path,class,split":
                continue
            parts = line.rsplit(",", 2)
            if len(parts) != 3 or parts[2] not in SPLITS:
                raise DataError(f"{path}:{lineno}: malformed manifest row {line!r}")
            rows.append((parts[0], parts[1], parts[2]))
    if not rows:
        raise DataError(f"{path}: empty manifest")
    class_names = tuple(sorted({r[1] for r in rows}, key=lambda n: n.encode("utf-8")))
    index_of = {n: i for i, n in enumerate(class_names)}
    samples = tuple(Sample(os.path.join(*p.split("/")), index_of[c])
                    for p, c, _ in rows)
    manifest = SplitManifest(seed, tuple(r[2] for r in rows))
    return Dataset(root, class_names, samples), manifest


@dataclass
class LabeledBatch:
    inputs: np.ndarray      # N x H x W x C float32
    labels: np.ndarray      # N int64
    indices: tuple[int, ...]  # dataset sample indices


def epoch_rng(seed: int, epoch: int) -> Rng:
    """The shuffle stream for one training epoch."""
    return Rng(seed).derive(STREAM_SHUFFLE, epoch)


def batches(ds: Dataset, sample_indices, batch_size: int, load_fn,
            shuffle_rng: Rng | None = None):
    """Yield LabeledBatch over the given samples; the final partial batch
    is kept. ``load_fn(sample_index) -> HxWxC float32`` supplies pixels."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    order = list(sample_indices)
    if shuffle_rng is not None:
        perm = shuffle_rng.permutation(len(order))
        order = [order[i] for i in perm]
    for start in range(0, len(order), batch_size):
        chunk = order[start:start + batch_size]
        imgs = [load_fn(i) for i in chunk]
        labels = np.array([ds.samples[i].class_index for i in chunk], dtype=np.int64)
        yield LabeledBatch(np.stack(imgs).astype(np.float32, copy=False),
                           labels, tuple(chunk))
