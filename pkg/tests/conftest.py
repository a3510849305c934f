"""Shared fixtures and the acceptance-criteria reporting hook."""

from __future__ import annotations

import os

import numpy as np
import pytest

from gournet.data import Dataset, Sample
from gournet.images import write_ppm

# One line per acceptance criterion, echoed at the end of the run so the
# pass/fail verdicts are visible in the terminal summary.
_ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, description: str, ok: bool,
                     detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"criterion {number:>2} [{status}] {description}"
    if detail:
        line += f" -- {detail}"
    _ACCEPTANCE_LINES[number] = line


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[number])


def synthetic_dataset(root: str, class_specs: dict[str, int],
                      size: int = 16, noise: float = 18.0,
                      seed: int = 99) -> Dataset:
    """Write a small PPM tree under root: one directory per class, each
    class a distinct mean color plus noise, and return the scanned Dataset.

    Colors are spread around the hue wheel so classes are separable by a
    small model; noise keeps the task non-trivial.
    """
    from gournet.data import scan_dataset

    rng = np.random.default_rng(seed)
    names = sorted(class_specs)
    for ci, name in enumerate(names):
        d = os.path.join(root, name)
        os.makedirs(d, exist_ok=True)
        angle = 2 * np.pi * ci / max(len(names), 1)
        mean = np.array([128 + 100 * np.cos(angle),
                         128 + 100 * np.sin(angle),
                         128 + 100 * np.cos(2 * angle)])
        for i in range(class_specs[name]):
            img = mean + rng.normal(0.0, noise, (size, size, 3))
            write_ppm(os.path.join(d, f"img{i:04d}.ppm"), img.clip(0, 255))
    return scan_dataset(root)


def fake_dataset(counts: dict[str, int], root: str = "/nowhere") -> Dataset:
    """An in-memory Dataset (no files on disk) for split/manifest logic."""
    names = tuple(sorted(counts, key=lambda n: n.encode("utf-8")))
    samples = []
    for ci, name in enumerate(names):
        for i in range(counts[name]):
            samples.append(Sample(os.path.join(name, f"img{i:04d}.ppm"), ci))
    return Dataset(root, names, tuple(samples))


@pytest.fixture()
def two_class_tree(tmp_path):
    """16 images per class, two clearly separable classes, on disk."""
    ds = synthetic_dataset(str(tmp_path / "data"),
                           {"healthy": 16, "leafspot": 16})
    return ds
