"""Oversampling plans: per-example weights, repeat factors, coverage.

The oversampling exponent ``beta`` interpolates between the raw dataset
(beta=0, every repeat factor is 1) and full inverse-prior balancing
(beta=1).  Each example's weight is the maximum of ``(1/p_k)**beta``
over its present labels, computed against the priors of the *original*
dataset; integer repeat factors are the weights normalized by the
dataset-wide minimum weight and rounded half away from zero, so the
least-weighted example maps to exactly 1.
"""

from __future__ import annotations

import json
import warnings as _warnings
from array import array
from dataclasses import dataclass
from typing import Optional

from labelbalance import _kernels
from labelbalance.dataset import LabelDataset, PriorVector, compute_priors
from labelbalance.errors import (
    ExtendedBetaWarning,
    InvalidBeta,
    MalformedRow,
    OverflowRisk,
    UnlabeledExampleWarning,
    VocabularyMismatch,
    ZeroPriorClass,
)
from labelbalance.imbalance import gini_eq3, gini_mad_oracle

PLAN_FORMAT = "labelbalance.plan.v1"

DEFAULT_INDEX_CEILING = 2**31


def _checked_beta(beta: float) -> list[str]:
    if beta < 0.0:
        raise InvalidBeta(f"oversampling exponent must be >= 0, got {beta}")
    notes = []
    if beta > 1.0:
        msg = f"oversampling exponent {beta} is above the usual [0, 1] range"
        _warnings.warn(msg, ExtendedBetaWarning, stacklevel=3)
        notes.append(msg)
    return notes


def _weights_raw(ds: LabelDataset, priors: PriorVector, beta: float):
    if len(priors) != ds.n_classes:
        raise VocabularyMismatch(
            f"priors have {len(priors)} classes, dataset has {ds.n_classes}"
        )
    counts = ds.label_counts()
    for k, c in enumerate(counts):
        if c > 0 and priors.priors[k] <= 0.0:
            raise ZeroPriorClass(
                f"class {k} occurs in the dataset but has prior 0"
            )
    weights, n_unlabeled = _kernels.example_weights(
        ds.flat_labels, ds.offsets, array("d", priors.priors), beta
    )
    return weights, n_unlabeled


def example_weights(ds: LabelDataset, priors: PriorVector,
                    beta: float) -> array:
    """Per-example oversampling weights m_j = max_k:present (1/p_k)**beta.

    ``priors`` must be the priors of the original dataset.  Unlabeled
    examples get weight 1.0 and trigger an
    :class:`UnlabeledExampleWarning`.
    """
    _checked_beta(beta)
    weights, n_unlabeled = _weights_raw(ds, priors, beta)
    if n_unlabeled:
        _warnings.warn(
            f"{n_unlabeled} examples have no labels; their weight is 1.0",
            UnlabeledExampleWarning,
            stacklevel=2,
        )
    return weights


def oversample_factors(weights) -> array:
    """Integer repeat factors round(m_j / min_j m_j), halves away from zero."""
    if len(weights) == 0:
        raise ValueError("empty weight list")
    wmin = min(weights)
    if not wmin > 0.0:
        raise ValueError("weights must be strictly positive")
    if isinstance(weights, array) and weights.typecode == "d":
        buf = weights
    else:
        buf = array("d", weights)
    return _kernels.round_factors(buf, wmin)


@dataclass(frozen=True)
class OversamplingPlan:
    """Frozen result of planning one oversampling pass.

    ``weights`` is None for plans loaded from disk (the plan file only
    stores the integer factors).
    """

    beta: float
    weights: Optional[array]
    factors: array
    expanded_size: int
    expanded_priors: PriorVector
    source_fingerprint: str
    warnings: tuple[str, ...]

    @property
    def n_examples(self) -> int:
        return len(self.factors)


def build_plan(ds: LabelDataset, beta: float) -> OversamplingPlan:
    """Compose weights and factors into a plan with expanded statistics."""
    notes = _checked_beta(beta)
    priors = compute_priors(ds)
    weights, n_unlabeled = _weights_raw(ds, priors, beta)
    if n_unlabeled:
        msg = f"{n_unlabeled} unlabeled examples kept with weight 1.0"
        _warnings.warn(msg, UnlabeledExampleWarning, stacklevel=2)
        notes.append(msg)
    factors = _kernels.round_factors(weights, min(weights))
    expanded_counts = _kernels.weighted_counts(
        ds.flat_labels, ds.offsets, factors, ds.n_classes
    )
    expanded_size = 0
    for f in factors:
        expanded_size += f
    return OversamplingPlan(
        beta=beta,
        weights=weights,
        factors=factors,
        expanded_size=expanded_size,
        expanded_priors=PriorVector.from_counts(expanded_counts, expanded_size),
        source_fingerprint=ds.fingerprint(),
        warnings=tuple(notes),
    )


def emit_expanded_index(plan: OversamplingPlan,
                        shuffle_seed: Optional[int] = None,
                        max_size: int = DEFAULT_INDEX_CEILING) -> array:
    """Materialize one epoch as an index list; index j appears factors[j] times.

    Unshuffled output is in dataset order.  A seed gives a deterministic
    permutation from the documented counter stream.
    """
    if plan.expanded_size > max_size:
        raise OverflowRisk(
            f"expanded size {plan.expanded_size} exceeds ceiling {max_size}"
        )
    indices = _kernels.expand_indices(plan.factors, plan.expanded_size)
    if shuffle_seed is not None:
        _kernels.shuffle_in_place(indices, shuffle_seed & 0xFFFFFFFFFFFFFFFF)
    return indices


@dataclass(frozen=True)
class BatchCoverage:
    """Expected per-batch class counts under uniform sampling of the
    expanded multiset."""

    batch_size: int
    expected: tuple[float, ...]
    fraction_at_least_one: float
    rarest_index: int
    rarest_expected: float


def batch_coverage(plan: OversamplingPlan, batch_size: int) -> BatchCoverage:
    """Expected count of each class per batch: batch_size * expanded prior."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    expected = tuple(batch_size * p for p in plan.expanded_priors.priors)
    covered = sum(1 for e in expected if e >= 1.0)
    rarest_expected, rarest_index = min((e, k) for k, e in enumerate(expected))
    return BatchCoverage(
        batch_size=batch_size,
        expected=expected,
        fraction_at_least_one=covered / len(expected),
        rarest_index=rarest_index,
        rarest_expected=rarest_expected,
    )


# --------------------------------------------------------------------------
# Plan files
# --------------------------------------------------------------------------


def plan_stats(plan: OversamplingPlan) -> dict:
    """Post-expansion imbalance statistics (ratio over positive counts)."""
    pv = plan.expanded_priors
    positive = [c for c in pv.per_class_counts if c > 0]
    if positive:
        ratio = max(positive) / min(positive)
        g3 = gini_eq3(pv)
        gmad = gini_mad_oracle(pv)
    else:
        ratio = g3 = gmad = None
    return {
        "n_examples": plan.n_examples,
        "n_classes": len(pv),
        "expanded_size": plan.expanded_size,
        "imbalance_ratio": ratio,
        "gini_eq3": g3,
        "gini_mad": gmad,
    }


def plan_to_obj(plan: OversamplingPlan) -> dict:
    pv = plan.expanded_priors
    stats = plan_stats(plan)
    stats["expanded_counts"] = list(pv.per_class_counts)
    return {
        "format": PLAN_FORMAT,
        "beta": plan.beta,
        "expanded_size": plan.expanded_size,
        "factors": list(plan.factors),
        "stats": stats,
        "source_fingerprint": plan.source_fingerprint,
        "warnings": list(plan.warnings),
    }


def plan_to_json(plan: OversamplingPlan) -> str:
    return json.dumps(plan_to_obj(plan), indent=1)


def plan_from_obj(obj: dict) -> OversamplingPlan:
    if not isinstance(obj, dict) or obj.get("format") != PLAN_FORMAT:
        raise MalformedRow(f"not a {PLAN_FORMAT} document")
    factors = array("q", (int(f) for f in obj["factors"]))
    stats = obj["stats"]
    expanded_size = int(obj["expanded_size"])
    return OversamplingPlan(
        beta=float(obj["beta"]),
        weights=None,
        factors=factors,
        expanded_size=expanded_size,
        expanded_priors=PriorVector.from_counts(
            stats["expanded_counts"], expanded_size
        ),
        source_fingerprint=str(obj["source_fingerprint"]),
        warnings=tuple(obj.get("warnings", ())),
    )


def plan_from_json(source) -> OversamplingPlan:
    if isinstance(source, str):
        return plan_from_obj(json.loads(source))
    return plan_from_obj(json.load(source))


def write_factors_sidecar(plan: OversamplingPlan, fp) -> None:
    """Newline-delimited factors aligned with dataset order."""
    for f in plan.factors:
        fp.write(f"{f}\n")
