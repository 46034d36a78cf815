"""Shared fixtures: tiny inline corpora and the optional AudioSet metadata.

The golden-value tests against the public AudioSet label CSVs only run
when the files are present; point AUDIOSET_META_DIR at a directory
containing

    class_labels_indices.csv
    balanced_train_segments.csv
    unbalanced_train_segments.csv
    eval_segments.csv

(see scripts/fetch_audioset_metadata.sh) or put them in data/audioset/.
"""

import os
from pathlib import Path

import pytest

from labelbalance.dataset import (
    ClassVocabulary,
    LabelDataset,
    parse_class_index_csv,
)

REPO_ROOT = Path(__file__).resolve().parent.parent

AUDIOSET_FILES = (
    "class_labels_indices.csv",
    "balanced_train_segments.csv",
    "unbalanced_train_segments.csv",
    "eval_segments.csv",
)


def audioset_dir():
    env = os.environ.get("AUDIOSET_META_DIR")
    candidates = [Path(env)] if env else []
    candidates.append(REPO_ROOT / "data" / "audioset")
    for cand in candidates:
        if cand.is_dir() and all((cand / f).is_file() for f in AUDIOSET_FILES):
            return cand
    return None


requires_audioset = pytest.mark.skipif(
    audioset_dir() is None,
    reason="public AudioSet label CSVs not present "
           "(set AUDIOSET_META_DIR or run scripts/fetch_audioset_metadata.sh)",
)


VOCAB2_CSV = 'index,mid,display_name\n0,/m/09x0r,"Speech"\n1,/m/04rlf,"Music"\n'


@pytest.fixture
def vocab2() -> ClassVocabulary:
    return parse_class_index_csv(VOCAB2_CSV)


@pytest.fixture
def tiny_ds(vocab2) -> LabelDataset:
    """Two examples: {0} and {0, 1} -> priors [1.0, 0.5]."""
    return LabelDataset.from_examples(vocab2, [
        ("ex-a", (0.0, 10.0), [0]),
        ("ex-b", (0.0, 10.0), [0, 1]),
    ])


@pytest.fixture(scope="session")
def audioset(request):
    """Lazily parsed public AudioSet metadata (session-cached)."""
    from labelbalance.dataset import load_segments

    root = audioset_dir()
    if root is None:
        pytest.skip("public AudioSet label CSVs not present")
    with open(root / "class_labels_indices.csv", encoding="utf-8",
              newline="") as fp:
        vocab = parse_class_index_csv(fp)
    data = {}
    with open(root / "unbalanced_train_segments.csv", encoding="utf-8",
              newline="") as f1, \
         open(root / "balanced_train_segments.csv", encoding="utf-8",
              newline="") as f2:
        data["train"] = load_segments(
            [("unbalanced_train_segments.csv", f1),
             ("balanced_train_segments.csv", f2)], vocab)
    with open(root / "eval_segments.csv", encoding="utf-8", newline="") as fp:
        data["eval"] = load_segments([("eval_segments.csv", fp)], vocab)
    data["vocab"] = vocab
    data["root"] = root
    return data
