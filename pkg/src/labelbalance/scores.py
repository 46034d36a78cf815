"""Evaluation runs: a dense score matrix aligned with a label dataset.

Two interchange formats:

* CSV with header ``example_id,<mid_0>,...,<mid_{K-1}>`` (columns must
  match the vocabulary order) and one row per example;
* binary: magic ``SCMX``, little-endian uint32 N then K, then N*K
  little-endian float32 row-major, with a JSON sidecar at
  ``<path>.json`` naming the vocabulary (and optionally the example
  ids; without them rows are taken in label order).

Rows may appear in any order when ids are available; they are aligned
to the label dataset's order on load.
"""

from __future__ import annotations

import json
import struct
import sys
from array import array
from typing import Iterable, Optional, TextIO

from labelbalance import _kernels
from labelbalance.dataset import LabelDataset, Source, _as_lines, _DataLines
from labelbalance.errors import (
    DuplicateExample,
    EmptyFile,
    ExampleIdMismatch,
    MalformedRow,
    VocabularyMismatch,
)

SCORES_MAGIC = b"SCMX"
SIDECAR_FORMAT = "labelbalance.scores.v1"


class EvalRun:
    """Immutable (N, K) score matrix tied to its ground-truth labels."""

    __slots__ = ("scores", "labels", "run_id")

    def __init__(self, scores: array, labels: LabelDataset, run_id: str = "run"):
        n = labels.n_examples
        k = labels.n_classes
        if not isinstance(scores, array) or scores.typecode != "d":
            scores = array("d", scores)
        if len(scores) != n * k:
            raise ValueError(
                f"score matrix has {len(scores)} entries, expected {n}x{k}"
            )
        if _kernels.count_nonfinite(scores):
            raise ValueError("scores must all be finite")
        self.scores = scores
        self.labels = labels
        self.run_id = run_id

    @property
    def n_examples(self) -> int:
        return self.labels.n_examples

    @property
    def n_classes(self) -> int:
        return self.labels.n_classes

    def score(self, j: int, k: int) -> float:
        return self.scores[j * self.n_classes + k]

    def column(self, k: int) -> array:
        return self.scores[k::self.n_classes]

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[float]], labels: LabelDataset,
                  run_id: str = "run") -> "EvalRun":
        flat = array("d")
        k = labels.n_classes
        for j, row in enumerate(rows):
            row = list(row)
            if len(row) != k:
                raise ValueError(f"row {j} has {len(row)} scores, expected {k}")
            flat.extend(row)
        return cls(flat, labels, run_id)


def read_scores_csv(source: Source, labels: LabelDataset,
                    run_id: Optional[str] = None) -> EvalRun:
    """Read a score CSV and align its rows to the label dataset order."""
    import csv as _csv

    lines = _DataLines(_as_lines(source))
    reader = _csv.reader(lines, skipinitialspace=True)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile("score CSV is empty") from None
    mids = tuple(c.strip() for c in header[1:])
    if not header or header[0].strip() != "example_id":
        raise MalformedRow("score CSV header must start with 'example_id'")
    if mids != labels.vocabulary.mids:
        raise VocabularyMismatch(
            "score CSV columns do not match the vocabulary order"
        )
    k = labels.n_classes
    by_id: dict[str, array] = {}
    for row in reader:
        if len(row) != k + 1:
            raise MalformedRow(
                f"line {lines.line_num}: expected {k + 1} fields, got {len(row)}"
            )
        ex_id = row[0].strip()
        if ex_id in by_id:
            raise DuplicateExample(
                f"line {lines.line_num}: duplicate example {ex_id!r}"
            )
        try:
            by_id[ex_id] = array("d", (float(v) for v in row[1:]))
        except ValueError:
            raise MalformedRow(
                f"line {lines.line_num}: non-numeric score"
            ) from None
    if not by_id:
        raise EmptyFile("score CSV has no data rows")
    return _aligned_run(by_id, labels, run_id or "run")


def _aligned_run(by_id: dict, labels: LabelDataset, run_id: str) -> EvalRun:
    if len(by_id) != labels.n_examples:
        raise ExampleIdMismatch(
            f"score file has {len(by_id)} examples, labels have "
            f"{labels.n_examples}"
        )
    flat = array("d")
    for ex_id in labels.ids:
        row = by_id.get(ex_id)
        if row is None:
            raise ExampleIdMismatch(f"no scores for example {ex_id!r}")
        flat.extend(row)
    return EvalRun(flat, labels, run_id)


def write_scores_csv(run: EvalRun, fp: TextIO) -> None:
    fp.write("example_id," + ",".join(run.labels.vocabulary.mids) + "\n")
    k = run.n_classes
    for j, ex_id in enumerate(run.labels.ids):
        row = run.scores[j * k:(j + 1) * k]
        fp.write(ex_id + "," + ",".join(repr(v) for v in row) + "\n")


def write_scores_binary(run: EvalRun, path: str) -> None:
    """Write the SCMX binary matrix plus its JSON sidecar.

    Scores are stored as float32, so a round trip quantizes them.
    """
    data = array("f", run.scores)
    if sys.byteorder == "big":
        data.byteswap()
    with open(path, "wb") as fp:
        fp.write(SCORES_MAGIC)
        fp.write(struct.pack("<II", run.n_examples, run.n_classes))
        fp.write(data.tobytes())
    sidecar = {
        "format": SIDECAR_FORMAT,
        "run_id": run.run_id,
        "mids": list(run.labels.vocabulary.mids),
        "example_ids": list(run.labels.ids),
    }
    with open(path + ".json", "w", encoding="utf-8") as fp:
        json.dump(sidecar, fp, indent=1)


def read_scores_binary(path: str, labels: LabelDataset,
                       run_id: Optional[str] = None) -> EvalRun:
    with open(path, "rb") as fp:
        magic = fp.read(4)
        if magic != SCORES_MAGIC:
            raise MalformedRow(f"{path}: bad magic {magic!r}, expected SCMX")
        n, k = struct.unpack("<II", fp.read(8))
        data = array("f")
        try:
            data.fromfile(fp, n * k)
        except EOFError:
            raise MalformedRow(f"{path}: truncated score matrix") from None
    if sys.byteorder == "big":
        data.byteswap()
    try:
        with open(path + ".json", "r", encoding="utf-8") as fp:
            sidecar = json.load(fp)
    except FileNotFoundError:
        raise MalformedRow(f"{path}.json: sidecar not found") from None
    if tuple(sidecar.get("mids", ())) != labels.vocabulary.mids:
        raise VocabularyMismatch(
            f"{path}.json: sidecar mids do not match the vocabulary"
        )
    if k != labels.n_classes:
        raise VocabularyMismatch(
            f"{path}: K={k} does not match vocabulary K={labels.n_classes}"
        )
    scores = array("d", data)
    ex_ids = sidecar.get("example_ids")
    rid = run_id or sidecar.get("run_id") or "run"
    if ex_ids is None:
        if n != labels.n_examples:
            raise ExampleIdMismatch(
                f"{path}: N={n} does not match labels N={labels.n_examples}"
            )
        return EvalRun(scores, labels, rid)
    if len(ex_ids) != n:
        raise MalformedRow(f"{path}.json: {len(ex_ids)} ids for N={n}")
    by_id = {}
    for j, ex_id in enumerate(ex_ids):
        if ex_id in by_id:
            raise DuplicateExample(f"{path}.json: duplicate id {ex_id!r}")
        by_id[ex_id] = scores[j * k:(j + 1) * k]
    return _aligned_run(by_id, labels, rid)
