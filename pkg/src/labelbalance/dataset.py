"""Multi-label dataset ingestion, priors, and synthetic fixtures.

Understands the three metadata formats published alongside AudioSet:

* class index CSV with header ``index,mid,display_name``;
* segments CSV, ``YTID, start_seconds, end_seconds, "mid1,mid2,..."``
  with ``#`` comment lines and the label field double-quoted;
* ontology JSON, an array of objects carrying ``id`` and ``name``.

Datasets are stored columnar (flat int32 label buffer plus int64
offsets) so the hot kernels can run over them directly, and are
immutable once built: safe to share across threads.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from array import array
from bisect import bisect_right
from dataclasses import dataclass
from hashlib import sha256
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, TextIO, Union

from labelbalance import _kernels
from labelbalance._prng import CounterStream
from labelbalance.errors import (
    DuplicateExample,
    DuplicateMid,
    EmptyFile,
    InfeasibleParams,
    MalformedRow,
    NonContiguousIndex,
    UnknownMid,
)

Source = Union[str, TextIO, Iterable[str]]

DATASET_FORMAT = "labelbalance.dataset.v1"

_NAN = float("nan")


class ClassEntry(NamedTuple):
    index: int
    mid: str
    name: str


class Example(NamedTuple):
    id: str
    segment: Optional[tuple[float, float]]
    labels: tuple[int, ...]


class ClassVocabulary:
    """Ordered class list; index k is position k, mids are unique."""

    __slots__ = ("entries", "_by_mid")

    def __init__(self, entries: Iterable[tuple]):
        rows = tuple(ClassEntry(int(i), str(m), str(n)) for i, m, n in entries)
        if not rows:
            raise EmptyFile("vocabulary has no classes")
        by_mid: dict[str, int] = {}
        for pos, entry in enumerate(rows):
            if entry.index != pos:
                raise NonContiguousIndex(
                    f"class index {entry.index} at position {pos}; "
                    f"indices must be exactly 0..{len(rows) - 1} in order"
                )
            if entry.mid in by_mid:
                raise DuplicateMid(f"mid {entry.mid!r} appears more than once")
            by_mid[entry.mid] = pos
        self.entries = rows
        self._by_mid = by_mid

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ClassEntry]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> ClassEntry:
        return self.entries[index]

    def __eq__(self, other) -> bool:
        return isinstance(other, ClassVocabulary) and self.entries == other.entries

    def __repr__(self) -> str:
        return f"ClassVocabulary(K={len(self.entries)})"

    @property
    def mids(self) -> tuple[str, ...]:
        return tuple(e.mid for e in self.entries)

    def index_of(self, mid: str) -> int:
        try:
            return self._by_mid[mid]
        except KeyError:
            raise UnknownMid(f"mid {mid!r} not in vocabulary") from None


class LabelDataset:
    """Immutable multi-label dataset over a fixed vocabulary.

    Construction goes through :meth:`from_examples` or the parsers; the
    initializer trusts its columnar arguments.
    """

    __slots__ = (
        "vocabulary",
        "_ids",
        "_segments",
        "_offsets",
        "_flat",
        "_counts",
        "_fingerprint",
    )

    def __init__(self, vocabulary: ClassVocabulary, ids: list[str],
                 segments: array, offsets: array, flat: array):
        self.vocabulary = vocabulary
        self._ids = ids
        self._segments = segments  # 2N doubles, NaN/NaN when absent
        self._offsets = offsets  # N+1 int64
        self._flat = flat  # int32 label indices
        self._counts: Optional[array] = None
        self._fingerprint: Optional[str] = None

    @classmethod
    def from_examples(cls, vocabulary: ClassVocabulary,
                      examples: Iterable[tuple]) -> "LabelDataset":
        """Build from (id, segment, labels) triples, validating everything."""
        builder = _DatasetBuilder(vocabulary)
        for ex_id, segment, labels in examples:
            builder.add(str(ex_id), segment, labels)
        return builder.build()

    # -- size and access ---------------------------------------------------

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def n_examples(self) -> int:
        return len(self._ids)

    @property
    def n_classes(self) -> int:
        return len(self.vocabulary)

    @property
    def ids(self) -> Sequence[str]:
        return self._ids

    def labels_of(self, j: int) -> tuple[int, ...]:
        return tuple(self._flat[self._offsets[j]:self._offsets[j + 1]])

    def segment_of(self, j: int) -> Optional[tuple[float, float]]:
        start = self._segments[2 * j]
        end = self._segments[2 * j + 1]
        if math.isnan(start) and math.isnan(end):
            return None
        return (start, end)

    def example(self, j: int) -> Example:
        return Example(self._ids[j], self.segment_of(j), self.labels_of(j))

    def __iter__(self) -> Iterator[Example]:
        return (self.example(j) for j in range(len(self._ids)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelDataset):
            return NotImplemented
        return (
            self.vocabulary == other.vocabulary
            and self._ids == other._ids
            and self._segments.tobytes() == other._segments.tobytes()
            and self._offsets == other._offsets
            and self._flat == other._flat
        )

    def __repr__(self) -> str:
        return f"LabelDataset(N={len(self._ids)}, K={self.n_classes})"

    # -- derived quantities --------------------------------------------------

    def label_counts(self) -> array:
        """Per-class example counts N_k (cached)."""
        if self._counts is None:
            self._counts = _kernels.count_labels(self._flat, self.n_classes)
        return self._counts

    @property
    def total_label_count(self) -> int:
        return len(self._flat)

    def unlabeled_examples(self) -> tuple[int, ...]:
        """Indices of examples with an empty label set (accepted but flagged)."""
        offs = self._offsets
        return tuple(j for j in range(len(self._ids)) if offs[j] == offs[j + 1])

    def fingerprint(self) -> str:
        """SHA-256 over the canonical little-endian encoding of the data.

        Covers mids, example ids, segments, and labels; display names are
        cosmetic and excluded.
        """
        if self._fingerprint is None:
            h = sha256(b"labelbalance.dataset.v1\n")
            h.update(len(self.vocabulary).to_bytes(8, "little"))
            h.update("\n".join(self.vocabulary.mids).encode("utf-8"))
            h.update(len(self._ids).to_bytes(8, "little"))
            h.update("\n".join(self._ids).encode("utf-8"))
            for buf in (self._segments, self._offsets, self._flat):
                h.update(_le_bytes(buf))
            self._fingerprint = h.hexdigest()
        return self._fingerprint

    # -- raw buffers for the kernels -----------------------------------------

    @property
    def flat_labels(self) -> array:
        return self._flat

    @property
    def offsets(self) -> array:
        return self._offsets


def _le_bytes(buf: array) -> bytes:
    if sys.byteorder == "little":
        return buf.tobytes()
    swapped = array(buf.typecode, buf)
    swapped.byteswap()
    return swapped.tobytes()


class _DatasetBuilder:
    """Accumulates validated examples into the columnar layout."""

    def __init__(self, vocabulary: ClassVocabulary):
        self.vocabulary = vocabulary
        self.ids: list[str] = []
        self.segments = array("d")
        self.offsets = array("q", [0])
        self.flat = array("i")
        self._seen: set[str] = set()

    def add(self, ex_id: str, segment, labels, where: str = "") -> None:
        if ex_id in self._seen:
            raise DuplicateExample(f"duplicate example {ex_id!r}{where}")
        self._seen.add(ex_id)
        self.ids.append(ex_id)
        if segment is None:
            self.segments.append(_NAN)
            self.segments.append(_NAN)
        else:
            start, end = segment
            self.segments.append(float(start))
            self.segments.append(float(end))
        uniq = sorted(set(labels))
        if uniq and (uniq[0] < 0 or uniq[-1] >= len(self.vocabulary)):
            raise ValueError(
                f"label index out of range for K={len(self.vocabulary)}{where}"
            )
        self.flat.extend(uniq)
        self.offsets.append(len(self.flat))

    def build(self) -> LabelDataset:
        if not self.ids:
            raise EmptyFile("dataset has no examples")
        return LabelDataset(
            self.vocabulary, self.ids, self.segments, self.offsets, self.flat
        )


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def _as_lines(source: Source) -> Iterable[str]:
    if isinstance(source, str):
        return source.splitlines()
    return source


class _DataLines:
    """Iterator that skips comment/blank lines while tracking line numbers."""

    def __init__(self, lines: Iterable[str]):
        self._it = iter(lines)
        self.line_num = 0

    def __iter__(self):
        return self

    def __next__(self) -> str:
        while True:
            line = next(self._it)
            self.line_num += 1
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            return line


def parse_class_index_csv(source: Source) -> ClassVocabulary:
    """Parse a class index CSV (header ``index,mid,display_name``).

    Display names may be quoted and contain commas.  The index column
    must equal the row position; gaps or reordering raise
    :class:`NonContiguousIndex`.
    """
    lines = _DataLines(_as_lines(source))
    reader = csv.reader(lines, skipinitialspace=True)
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFile("class index CSV is empty") from None
    if [c.strip() for c in header] != ["index", "mid", "display_name"]:
        raise MalformedRow(
            f"line {lines.line_num}: expected header 'index,mid,display_name'"
        )
    entries = []
    for row in reader:
        if len(row) != 3:
            raise MalformedRow(
                f"line {lines.line_num}: expected 3 fields, got {len(row)}"
            )
        try:
            idx = int(row[0].strip())
        except ValueError:
            raise MalformedRow(
                f"line {lines.line_num}: non-integer index {row[0]!r}"
            ) from None
        if idx != len(entries):
            raise NonContiguousIndex(
                f"line {lines.line_num}: index {idx}, expected {len(entries)}"
            )
        entries.append((idx, row[1].strip(), row[2].strip()))
    if not entries:
        raise EmptyFile("class index CSV has no data rows")
    return ClassVocabulary(entries)


def parse_ontology_json(source: Union[str, TextIO]) -> ClassVocabulary:
    """Parse an ontology JSON array of ``{"id": ..., "name": ...}`` objects.

    Indices are assigned in array order.
    """
    if isinstance(source, str):
        data = json.loads(source)
    else:
        data = json.load(source)
    if not isinstance(data, list):
        raise MalformedRow("ontology JSON must be an array of objects")
    if not data:
        raise EmptyFile("ontology JSON has no entries")
    entries = []
    for pos, obj in enumerate(data):
        if not isinstance(obj, dict) or "id" not in obj or "name" not in obj:
            raise MalformedRow(f"ontology entry {pos} lacks 'id'/'name'")
        entries.append((pos, obj["id"], obj["name"]))
    return ClassVocabulary(entries)


def parse_segments_csv(source: Source, vocab: ClassVocabulary) -> LabelDataset:
    """Parse one segments CSV into a dataset.

    Grammar: ``#`` lines are comments; data rows are
    ``YTID, start_seconds, end_seconds, "mid1,mid2,..."`` with optional
    spaces after commas and the label field double-quoted.  Rows with an
    empty label field are accepted and flagged (see
    :meth:`LabelDataset.unlabeled_examples`).
    """
    builder = _DatasetBuilder(vocab)
    _parse_segments_into(builder, source, "")
    return builder.build()


def _parse_segments_into(builder: _DatasetBuilder, source: Source,
                         origin: str) -> None:
    vocab = builder.vocabulary
    lines = _DataLines(_as_lines(source))
    reader = csv.reader(lines, skipinitialspace=True)
    n_rows = 0
    tag = f" in {origin}" if origin else ""
    for row in reader:
        where = f" (line {lines.line_num}{tag})"
        if len(row) != 4:
            raise MalformedRow(
                f"line {lines.line_num}{tag}: expected 4 fields, got {len(row)}"
            )
        ytid = row[0].strip()
        if not ytid:
            raise MalformedRow(f"line {lines.line_num}{tag}: empty YTID")
        try:
            start = float(row[1])
            end = float(row[2])
        except ValueError:
            raise MalformedRow(
                f"line {lines.line_num}{tag}: bad segment times "
                f"{row[1]!r}, {row[2]!r}"
            ) from None
        label_field = row[3].strip()
        labels = []
        if label_field:
            for mid in label_field.split(","):
                mid = mid.strip()
                try:
                    labels.append(vocab.index_of(mid))
                except UnknownMid:
                    raise UnknownMid(
                        f"line {lines.line_num}{tag}: mid {mid!r} "
                        "not in vocabulary"
                    ) from None
        builder.add(ytid, (start, end), labels, where)
        n_rows += 1
    if n_rows == 0:
        raise EmptyFile(f"no data rows{tag}" if tag else "no data rows")


def load_segments(sources: Sequence[tuple[str, Source]],
                  vocab: ClassVocabulary) -> LabelDataset:
    """Parse several segments CSVs into one dataset.

    ``sources`` is a list of (origin_name, stream) pairs; duplicate ids
    are rejected across files, matching the single-file rule.
    """
    builder = _DatasetBuilder(vocab)
    for origin, stream in sources:
        _parse_segments_into(builder, stream, origin)
    return builder.build()


# --------------------------------------------------------------------------
# Priors
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PriorVector:
    """Per-class priors p_k = N_k / N with their exact integer counts."""

    priors: tuple[float, ...]
    total_examples: int
    per_class_counts: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.priors)

    @classmethod
    def from_counts(cls, counts: Iterable[int], total: int) -> "PriorVector":
        counts = tuple(int(c) for c in counts)
        if total < 1:
            raise ValueError("total_examples must be >= 1")
        return cls(tuple(c / total for c in counts), total, counts)


def compute_priors(ds: LabelDataset) -> PriorVector:
    """Exact priors of a dataset; classes absent everywhere get 0.0."""
    return PriorVector.from_counts(ds.label_counts(), ds.n_examples)


# --------------------------------------------------------------------------
# Synthetic data
# --------------------------------------------------------------------------


def synth_powerlaw(n_classes: int, n_examples: int, exponent: float,
                   labels_per_example: float, seed: int) -> LabelDataset:
    """Deterministic power-law synthetic dataset for tests and demos.

    Class ``k`` is drawn with weight proportional to ``(k+1)**-exponent``;
    label-set sizes are ``1 + Poisson(labels_per_example - 1)`` (clamped
    to ``n_classes``), so the mean size is approximately
    ``labels_per_example``.  Example ``j < n_classes`` always contains
    class ``j``, which guarantees every class appears at least once.
    All randomness comes from the counter stream documented in
    ``labelbalance._prng``, so a given seed reproduces the identical
    dataset everywhere.
    """
    if n_classes < 2:
        raise InfeasibleParams("need at least 2 classes")
    if n_examples < n_classes:
        raise InfeasibleParams(
            f"N={n_examples} cannot cover all {n_classes} classes"
        )
    if labels_per_example < 1.0:
        raise InfeasibleParams("labels_per_example must be >= 1")
    if exponent < 0.0:
        raise InfeasibleParams("exponent must be >= 0")

    vocab = ClassVocabulary(
        (k, f"/synth/{k:04d}", f"synthetic class {k}") for k in range(n_classes)
    )
    cum = []
    total = 0.0
    for k in range(n_classes):
        total += (k + 1.0) ** -exponent
        cum.append(total)

    stream = CounterStream(seed)
    mu = labels_per_example - 1.0
    builder = _DatasetBuilder(vocab)
    for j in range(n_examples):
        size = 1 + (_poisson(stream, mu) if mu > 0.0 else 0)
        if size > n_classes:
            size = n_classes
        labels = {j} if j < n_classes else set()
        while len(labels) < size:
            u = stream.next_double()
            labels.add(bisect_right(cum, u * total))
        builder.add(f"synth-{j:08d}", None, labels)
    return builder.build()


def _poisson(stream: CounterStream, mu: float) -> int:
    limit = math.exp(-mu)
    k = 0
    p = 1.0
    while True:
        p *= stream.next_double()
        if p <= limit:
            return k
        k += 1


# --------------------------------------------------------------------------
# Canonical JSON serialization
# --------------------------------------------------------------------------


def dataset_to_obj(ds: LabelDataset) -> dict:
    """Canonical JSON-ready form: labels ascending, segments optional."""
    examples = []
    for ex in ds:
        obj: dict = {"id": ex.id}
        if ex.segment is not None:
            obj["start"] = ex.segment[0]
            obj["end"] = ex.segment[1]
        obj["labels"] = list(ex.labels)
        examples.append(obj)
    return {
        "format": DATASET_FORMAT,
        "vocabulary": [
            {"index": e.index, "mid": e.mid, "name": e.name}
            for e in ds.vocabulary
        ],
        "examples": examples,
    }


def dataset_to_json(ds: LabelDataset) -> str:
    return json.dumps(dataset_to_obj(ds), indent=1)


def dataset_from_obj(obj: dict) -> LabelDataset:
    if not isinstance(obj, dict) or obj.get("format") != DATASET_FORMAT:
        raise MalformedRow(f"not a {DATASET_FORMAT} document")
    vocab = ClassVocabulary(
        (e["index"], e["mid"], e["name"]) for e in obj["vocabulary"]
    )
    builder = _DatasetBuilder(vocab)
    for ex in obj["examples"]:
        segment = None
        if "start" in ex or "end" in ex:
            segment = (ex["start"], ex["end"])
        builder.add(str(ex["id"]), segment, ex["labels"])
    return builder.build()


def dataset_from_json(source: Union[str, TextIO]) -> LabelDataset:
    if isinstance(source, str):
        return dataset_from_obj(json.loads(source))
    return dataset_from_obj(json.load(source))
