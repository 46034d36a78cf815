"""Multi-label ranking metrics and their macro-averaged report.

Average precision is the non-interpolated variant: precision evaluated
at each positive's rank in the descending score ordering, averaged over
positives.  Interpolated AP differs; this choice is deliberate and
recorded in every report together with the tie rule.  Score ties are
ordered negatives-first by default (the pessimistic rule), which is
deterministic and conservative.

ROC-AUC is the Mann-Whitney statistic (ties count half), computed from
midrank sums in O(n log n).

The sensitivity index is computed from the *macro-averaged* AUC --
AUCs are probabilities and may be meaningfully averaged, and averaging
after the conversion gives a different number -- as sqrt(2) times the
inverse normal CDF.
"""

from __future__ import annotations

import json
import math
import warnings as _warnings
from array import array
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from labelbalance import _kernels
from labelbalance._special import normal_cdf, probit, student_t_two_sided_p
from labelbalance.dataset import PriorVector
from labelbalance.errors import (
    ClampedValueWarning,
    DegenerateAuc,
    InsufficientPoints,
    NoDefinedClasses,
    UndefinedMetric,
    VocabularyMismatch,
    ZeroVariance,
)
from labelbalance.scores import EvalRun

_SQRT2 = math.sqrt(2.0)

TIE_RULES = {
    "pessimistic": _kernels.TIE_NEGATIVES_FIRST,
    "optimistic": _kernels.TIE_POSITIVES_FIRST,
    "original": _kernels.TIE_ORIGINAL_ORDER,
}

# One ulp inside (0, 1): where degenerate AUCs land when clamped.
AUC_CLAMP_LO = 2.0**-53
AUC_CLAMP_HI = 1.0 - 2.0**-53


def _prepare(scores: Sequence[float], positives: Iterable[int]):
    buf = scores if isinstance(scores, array) and scores.typecode == "d" \
        else array("d", scores)
    n = len(buf)
    if _kernels.count_nonfinite(buf):
        raise ValueError("scores must all be finite")
    mask = bytearray(n)
    n_pos = 0
    for r in positives:
        if not 0 <= r < n:
            raise ValueError(f"positive row {r} out of range for n={n}")
        if not mask[r]:
            mask[r] = 1
            n_pos += 1
    if n_pos == 0:
        raise UndefinedMetric("no positive examples")
    if n_pos == n:
        raise UndefinedMetric("no negative examples")
    return buf, mask


def average_precision(scores: Sequence[float], positives: Iterable[int],
                      tie_rule: str = "pessimistic") -> float:
    """Non-interpolated AP of one score list against a positive set."""
    buf, mask = _prepare(scores, positives)
    ap, _ = _kernels.rank_metrics(buf, mask, TIE_RULES[tie_rule])
    return ap


def roc_auc(scores: Sequence[float], positives: Iterable[int]) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) with ties counted half."""
    buf, mask = _prepare(scores, positives)
    _, auc = _kernels.rank_metrics(buf, mask, _kernels.TIE_NEGATIVES_FIRST)
    return auc


def dprime_from_auc(auc: float) -> float:
    """Sensitivity index sqrt(2) * probit(auc) for auc in (0, 1)."""
    if not 0.0 < auc < 1.0:
        raise DegenerateAuc(f"AUC must lie strictly in (0, 1), got {auc}")
    return _SQRT2 * probit(auc)


def auc_from_dprime(d: float) -> float:
    """Inverse of :func:`dprime_from_auc`; |d| > 40 is clamped."""
    if d != d:
        raise ValueError("d-prime is NaN")
    if abs(d) > 40.0:
        _warnings.warn(
            f"d-prime {d} clamped to +/-40 before conversion",
            ClampedValueWarning,
            stacklevel=2,
        )
        d = 40.0 if d > 0 else -40.0
    return normal_cdf(d / _SQRT2)


@dataclass(frozen=True)
class PerClassMetric:
    index: int
    mid: str
    ap: Optional[float]
    auc: Optional[float]
    n_pos: int


@dataclass(frozen=True)
class MetricReport:
    """Per-class AP/AUC plus macro averages for one evaluation run."""

    run_id: str
    mids: tuple[str, ...]
    per_class: tuple[PerClassMetric, ...]
    map: float
    macro_auc: float
    d_prime: float
    skipped_classes: tuple[int, ...]
    tie_rule: str
    n_examples: int
    warnings: tuple[str, ...]


def _neumaier(values: Iterable[float]) -> float:
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def macro_report(run: EvalRun, tie_rule: str = "pessimistic") -> MetricReport:
    """Evaluate every class and macro-average the defined ones.

    Classes with zero positives (or zero negatives) in the evaluation
    set have no defined AP/AUC; they are skipped and listed, not scored
    zero.  The sensitivity index is converted from the macro AUC, never
    averaged per class.  Accumulation runs in ascending class index with
    compensated summation, so the result does not depend on evaluation
    order.
    """
    if tie_rule not in TIE_RULES:
        raise ValueError(f"unknown tie rule {tie_rule!r}")
    labels = run.labels
    n = run.n_examples
    k_total = run.n_classes
    positives: list[list[int]] = [[] for _ in range(k_total)]
    offs = labels.offsets
    flat = labels.flat_labels
    for j in range(n):
        for i in range(offs[j], offs[j + 1]):
            positives[flat[i]].append(j)

    per_class: list[PerClassMetric] = []
    skipped: list[int] = []
    aps: list[float] = []
    aucs: list[float] = []
    notes: list[str] = []
    mids = labels.vocabulary.mids
    tie_mode = TIE_RULES[tie_rule]
    for k in range(k_total):
        rows = positives[k]
        n_pos = len(rows)
        if n_pos == 0 or n_pos == n:
            per_class.append(PerClassMetric(k, mids[k], None, None, n_pos))
            skipped.append(k)
            continue
        mask = bytearray(n)
        for r in rows:
            mask[r] = 1
        ap, auc = _kernels.rank_metrics(run.column(k), mask, tie_mode)
        per_class.append(PerClassMetric(k, mids[k], ap, auc, n_pos))
        aps.append(ap)
        aucs.append(auc)

    if not aps:
        raise NoDefinedClasses("every class is undefined in this run")
    if skipped:
        notes.append(
            f"{len(skipped)} classes skipped (no positives or no negatives)"
        )
    mean_ap = _neumaier(aps) / len(aps)
    macro_auc = _neumaier(aucs) / len(aucs)
    d_auc = macro_auc
    if d_auc <= 0.0 or d_auc >= 1.0:
        clamped = min(max(d_auc, AUC_CLAMP_LO), AUC_CLAMP_HI)
        msg = f"macro AUC {d_auc} clamped to {clamped} for d-prime"
        _warnings.warn(msg, ClampedValueWarning, stacklevel=2)
        notes.append(msg)
        d_auc = clamped
    d_prime = _SQRT2 * probit(d_auc)

    return MetricReport(
        run_id=run.run_id,
        mids=mids,
        per_class=tuple(per_class),
        map=mean_ap,
        macro_auc=macro_auc,
        d_prime=d_prime,
        skipped_classes=tuple(skipped),
        tie_rule=tie_rule,
        n_examples=n,
        warnings=tuple(notes),
    )


# --------------------------------------------------------------------------
# Deltas between runs and the delta-vs-prior regression
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaEntry:
    index: int
    mid: str
    delta_ap: float
    delta_auc: float


@dataclass(frozen=True)
class DeltaReport:
    run_a: str
    run_b: str
    deltas: tuple[DeltaEntry, ...]
    omitted_classes: tuple[int, ...]


def per_class_delta(a: MetricReport, b: MetricReport) -> DeltaReport:
    """Per-class (b - a) metric changes; undefined classes are omitted."""
    if a.mids != b.mids:
        raise VocabularyMismatch("reports do not share a vocabulary")
    deltas = []
    omitted = []
    for ea, eb in zip(a.per_class, b.per_class):
        if None in (ea.ap, eb.ap, ea.auc, eb.auc):
            omitted.append(ea.index)
            continue
        deltas.append(DeltaEntry(
            index=ea.index,
            mid=ea.mid,
            delta_ap=eb.ap - ea.ap,
            delta_auc=eb.auc - ea.auc,
        ))
    return DeltaReport(
        run_a=a.run_id,
        run_b=b.run_id,
        deltas=tuple(deltas),
        omitted_classes=tuple(omitted),
    )


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float
    t_statistic: float
    p_value: float
    degrees_of_freedom: int


def delta_prior_regression(deltas: Union[DeltaReport, Iterable],
                           priors: PriorVector) -> RegressionResult:
    """OLS of per-class AP change on log10 of the class prior.

    Classes with zero prior are excluded (their log is undefined).  The
    two-sided p-value comes from the Student-t distribution with n-2
    degrees of freedom.
    """
    if isinstance(deltas, DeltaReport):
        entries = [(e.index, e.delta_ap) for e in deltas.deltas]
    else:
        entries = [(e.index, e.delta_ap) if isinstance(e, DeltaEntry)
                   else (int(e[0]), float(e[1])) for e in deltas]
    xs = []
    ys = []
    for idx, dap in entries:
        p = priors.priors[idx]
        if p > 0.0:
            xs.append(math.log10(p))
            ys.append(dap)
    n = len(xs)
    if n < 3:
        raise InsufficientPoints(f"need >= 3 usable classes, got {n}")
    if all(x == xs[0] for x in xs):
        raise ZeroVariance("all priors are identical")
    xbar = _neumaier(xs) / n
    ybar = _neumaier(ys) / n
    sxx = _neumaier((x - xbar) ** 2 for x in xs)
    if sxx == 0.0:
        raise ZeroVariance("regressor has no variance")
    sxy = _neumaier((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    sst = _neumaier((y - ybar) ** 2 for y in ys)
    slope = sxy / sxx
    intercept = ybar - slope * xbar
    sse = sst - slope * sxy
    if sse < 0.0:  # rounding guard
        sse = 0.0
    df = n - 2
    se2 = (sse / df) / sxx
    if se2 <= 0.0:
        t = 0.0 if slope == 0.0 else math.copysign(math.inf, slope)
    else:
        t = slope / math.sqrt(se2)
    p_value = student_t_two_sided_p(t, df)
    r_squared = 1.0 - sse / sst if sst > 0.0 else 0.0
    return RegressionResult(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        t_statistic=t,
        p_value=p_value,
        degrees_of_freedom=df,
    )


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def metric_report_to_obj(report: MetricReport) -> dict:
    return {
        "run_id": report.run_id,
        "map": report.map,
        "macro_auc": report.macro_auc,
        "d_prime": report.d_prime,
        "tie_rule": report.tie_rule,
        "n_examples": report.n_examples,
        "skipped_classes": list(report.skipped_classes),
        "per_class": [
            {"index": e.index, "mid": e.mid, "ap": e.ap, "auc": e.auc,
             "n_pos": e.n_pos}
            for e in report.per_class
        ],
        "warnings": list(report.warnings),
    }


def metric_report_to_json(report: MetricReport) -> str:
    return json.dumps(metric_report_to_obj(report), indent=1)


def metric_report_from_obj(obj: dict) -> MetricReport:
    per_class = tuple(
        PerClassMetric(int(e["index"]), str(e["mid"]), e["ap"], e["auc"],
                       int(e["n_pos"]))
        for e in obj["per_class"]
    )
    return MetricReport(
        run_id=str(obj.get("run_id", "run")),
        mids=tuple(e.mid for e in per_class),
        per_class=per_class,
        map=float(obj["map"]),
        macro_auc=float(obj["macro_auc"]),
        d_prime=float(obj["d_prime"]),
        skipped_classes=tuple(int(k) for k in obj.get("skipped_classes", ())),
        tie_rule=str(obj.get("tie_rule", "pessimistic")),
        n_examples=int(obj.get("n_examples", 0)),
        warnings=tuple(obj.get("warnings", ())),
    )


def metric_report_from_json(source) -> MetricReport:
    if isinstance(source, str):
        return metric_report_from_obj(json.loads(source))
    return metric_report_from_obj(json.load(source))


def regression_to_obj(result: RegressionResult) -> dict:
    return {
        "slope": result.slope,
        "intercept": result.intercept,
        "r_squared": result.r_squared,
        "t_statistic": result.t_statistic,
        "p_value": result.p_value,
        "degrees_of_freedom": result.degrees_of_freedom,
    }
