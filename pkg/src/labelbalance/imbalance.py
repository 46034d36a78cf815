"""Class-imbalance measures over prior vectors.

Two Gini variants are provided on purpose.  ``gini_eq3`` is the
cumulative-share form

    1 - 2 * sum_k cum_k / (K * sum_k p_k)        (p sorted ascending)

which evaluates to -1/K (not 0) for uniform priors; it is what the
statistics tables here report.  ``gini_mad_oracle`` is the conventional
mean-absolute-difference form, an O(K^2) cross-check satisfying
``gini_eq3 == gini_mad_oracle - 1/K`` exactly (up to rounding).  Both
are scale invariant, so computing them on priors or on raw counts (the
fraction of total labels) gives the same value; internally exact integer
counts are used whenever available.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from labelbalance.dataset import LabelDataset, PriorVector
from labelbalance.errors import AllZeroPriors, ZeroPriorClass

Values = Union[PriorVector, Sequence[float]]


def _values_of(p: Values) -> tuple:
    """Exact counts for a PriorVector, raw values for a plain sequence."""
    if isinstance(p, PriorVector):
        return p.per_class_counts
    vals = tuple(p)
    if any(v < 0 for v in vals):
        raise ValueError("prior values must be non-negative")
    return vals


def imbalance_ratio(p: Values) -> float:
    """Head-to-tail ratio max_k(p_k) / min_k(p_k).

    Raises :class:`ZeroPriorClass` if any class has zero mass, which
    makes the ratio undefined.
    """
    vals = _values_of(p)
    if not vals:
        raise ValueError("empty prior vector")
    lo = min(vals)
    if lo == 0:
        raise ZeroPriorClass("imbalance ratio undefined: a class has no examples")
    return max(vals) / lo


def gini_eq3(p: Values) -> float:
    """Cumulative-share Gini of a prior vector (uniform -> exactly -1/K).

    Values are sorted ascending before the cumulative sums; ties are
    harmless because equal values contribute identically.
    """
    vals = sorted(_values_of(p))
    if not vals:
        raise ValueError("empty prior vector")
    cum = 0
    total_cum = 0
    for v in vals:
        cum += v
        total_cum += cum
    if cum == 0:
        raise AllZeroPriors("all priors are zero")
    # Single division keeps integer-count inputs exact: uniform counts
    # give exactly -1/K, one-hot counts exactly (K-2)/K.
    k = len(vals)
    return (k * cum - 2 * total_cum) / (k * cum)


def gini_mad_oracle(p: Values) -> float:
    """Mean-absolute-difference Gini: sum_ij |p_i - p_j| / (2 K sum p).

    Brute-force O(K^2); kept as the independent cross-check of
    :func:`gini_eq3` and reported alongside it.
    """
    vals = _values_of(p)
    if not vals:
        raise ValueError("empty prior vector")
    total = sum(vals)
    if total == 0:
        raise AllZeroPriors("all priors are zero")
    acc = 0
    for i, vi in enumerate(vals):
        for vj in vals:
            acc += abs(vi - vj)
    return acc / (2 * len(vals) * total)


@dataclass(frozen=True)
class ClassStat:
    index: int
    mid: str
    name: str
    count: int


@dataclass(frozen=True)
class ImbalanceReport:
    """Bundle of imbalance statistics for one dataset."""

    imbalance_ratio: Optional[float]
    gini_eq3: Optional[float]
    gini_mad: Optional[float]
    head: Optional[ClassStat]
    tail: Optional[ClassStat]
    n_examples: int
    n_classes: int
    warnings: tuple[str, ...]


def imbalance_report(ds: LabelDataset) -> ImbalanceReport:
    """Compute the full imbalance report for a dataset.

    Zero-count classes do not fail the report: they are excluded from
    the ratio (head/tail run over positive-count classes) with a
    warning, but still contribute their zeros to both Gini values.
    """
    counts = ds.label_counts()
    n_classes = ds.n_classes
    warnings: list[str] = []

    positive = [(c, k) for k, c in enumerate(counts) if c > 0]
    n_zero = n_classes - len(positive)
    if n_zero:
        warnings.append(
            f"{n_zero} zero-count classes excluded from the imbalance ratio"
        )

    head = tail = None
    ratio = None
    if positive:
        # ties on count break toward the lowest class index
        head_count, neg_k = max((c, -k) for c, k in positive)
        head_k = -neg_k
        tail_count, tail_k = min((c, k) for c, k in positive)
        ratio = head_count / tail_count
        head = _class_stat(ds, head_k, head_count)
        tail = _class_stat(ds, tail_k, tail_count)
    else:
        warnings.append("no class has any example; statistics undefined")

    g3 = gmad = None
    if positive:
        pv = PriorVector.from_counts(counts, ds.n_examples)
        g3 = gini_eq3(pv)
        gmad = gini_mad_oracle(pv)

    return ImbalanceReport(
        imbalance_ratio=ratio,
        gini_eq3=g3,
        gini_mad=gmad,
        head=head,
        tail=tail,
        n_examples=ds.n_examples,
        n_classes=n_classes,
        warnings=tuple(warnings),
    )


def _class_stat(ds: LabelDataset, k: int, count: int) -> ClassStat:
    entry = ds.vocabulary[k]
    return ClassStat(index=k, mid=entry.mid, name=entry.name, count=count)


def report_to_obj(report: ImbalanceReport) -> dict:
    def stat(s: Optional[ClassStat]):
        if s is None:
            return None
        return {"index": s.index, "mid": s.mid, "name": s.name, "count": s.count}

    return {
        "imbalance_ratio": report.imbalance_ratio,
        "gini_eq3": report.gini_eq3,
        "gini_mad": report.gini_mad,
        "head": stat(report.head),
        "tail": stat(report.tail),
        "n_examples": report.n_examples,
        "n_classes": report.n_classes,
        "warnings": list(report.warnings),
    }


def report_to_json(report: ImbalanceReport) -> str:
    return json.dumps(report_to_obj(report), indent=1)
