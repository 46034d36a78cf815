"""Kernel dispatch: compiled extension if available, pure Python if not.

Set ``LABELBALANCE_PURE=1`` to force the pure-Python implementation even
when the extension is built (used by the parity tests and the
benchmark).  ``ACTIVE_IMPL`` records which one was selected.
"""

import os

if os.environ.get("LABELBALANCE_PURE"):
    from labelbalance._kernels import _pykernels as _impl
else:
    try:
        from labelbalance._kernels import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from labelbalance._kernels import _pykernels as _impl

ACTIVE_IMPL = _impl.IMPL

TIE_NEGATIVES_FIRST = _impl.TIE_NEGATIVES_FIRST
TIE_POSITIVES_FIRST = _impl.TIE_POSITIVES_FIRST
TIE_ORIGINAL_ORDER = _impl.TIE_ORIGINAL_ORDER

count_labels = _impl.count_labels
example_weights = _impl.example_weights
round_factors = _impl.round_factors
weighted_counts = _impl.weighted_counts
count_nonfinite = _impl.count_nonfinite
expand_indices = _impl.expand_indices
shuffle_in_place = _impl.shuffle_in_place
rank_metrics = _impl.rank_metrics
