"""Pure-Python kernels: the reference implementation of the hot loops.

The compiled module ``_ckernels`` mirrors every function here and must
stay *bit-compatible*: identical floating-point operation order,
identical tie-breaking, identical integer arithmetic.  Tests compare the
two implementations element-for-element, so any change to one side has
to land on both.

Inputs are flat buffers (``array.array`` / ``bytearray``):

* ``flat``     int32, concatenated label indices of all examples
* ``offsets``  int64, length n+1; example ``j`` owns ``flat[offsets[j]:offsets[j+1]]``
* ``priors``   float64, length K
* ``factors``  int64, per-example repeat counts
* ``pos``      uint8 mask, 1 where the row is a positive
"""

from array import array
from math import floor, isfinite

from labelbalance._prng import CounterStream

IMPL = "python"

# Tie handling for equal scores in the ranking used by average precision.
TIE_NEGATIVES_FIRST = 0
TIE_POSITIVES_FIRST = 1
TIE_ORIGINAL_ORDER = 2


def count_labels(flat, n_classes):
    """Per-class example counts N_k from the flat label buffer."""
    counts = array("q", bytes(8 * n_classes))
    for k in flat:
        counts[k] += 1
    return counts


def example_weights(flat, offsets, priors, beta):
    """Per-example weight: max over present labels of (1/p_k)**beta.

    Examples with an empty label set get weight 1.0.  Returns
    ``(weights, n_unlabeled)``.
    """
    n = len(offsets) - 1
    out = array("d", bytes(8 * n))
    n_unlabeled = 0
    for j in range(n):
        lo = offsets[j]
        hi = offsets[j + 1]
        if hi == lo:
            out[j] = 1.0
            n_unlabeled += 1
            continue
        w = 0.0
        for i in range(lo, hi):
            v = (1.0 / priors[flat[i]]) ** beta
            if v > w:
                w = v
        out[j] = w
    return out, n_unlabeled


def round_factors(weights, wmin):
    """Integer repeat counts: round(w / wmin), halves away from zero."""
    out = array("q", bytes(8 * len(weights)))
    for j, w in enumerate(weights):
        out[j] = int(floor(w / wmin + 0.5))
    return out


def weighted_counts(flat, offsets, factors, n_classes):
    """Per-class counts of the expanded multiset: sum_j M_j * c_jk."""
    counts = array("q", bytes(8 * n_classes))
    n = len(offsets) - 1
    for j in range(n):
        f = factors[j]
        for i in range(offsets[j], offsets[j + 1]):
            counts[flat[i]] += f
    return counts


def count_nonfinite(values):
    """Number of NaN/inf entries in a float buffer."""
    bad = 0
    for v in values:
        if not isfinite(v):
            bad += 1
    return bad


def expand_indices(factors, total):
    """Epoch index list: index j repeated factors[j] times, in order."""
    out = array("i", bytes(4 * total))
    pos = 0
    for j, f in enumerate(factors):
        for _ in range(f):
            out[pos] = j
            pos += 1
    return out


def shuffle_in_place(indices, seed):
    """Fisher-Yates shuffle driven by the documented counter stream."""
    rng = CounterStream(seed)
    for i in range(len(indices) - 1, 0, -1):
        j = rng.next_below(i + 1)
        indices[i], indices[j] = indices[j], indices[i]


def rank_metrics(scores, pos, tie_mode):
    """Average precision and ROC-AUC of one score column.

    The caller guarantees at least one positive and one negative and
    finite scores.  AP ranks descending by score; equal scores are
    ordered by ``tie_mode``, then by original row index.  AUC uses
    midranks, so it is independent of the tie mode.
    """
    n = len(scores)
    if tie_mode == TIE_NEGATIVES_FIRST:
        order = sorted(range(n), key=lambda i: (-scores[i], pos[i], i))
    elif tie_mode == TIE_POSITIVES_FIRST:
        order = sorted(range(n), key=lambda i: (-scores[i], -pos[i], i))
    else:
        order = sorted(range(n), key=lambda i: (-scores[i], i))

    n_pos = 0
    ap_sum = 0.0
    for r in range(n):
        if pos[order[r]]:
            n_pos += 1
            ap_sum += n_pos / (r + 1)
    ap = ap_sum / n_pos

    # Midrank sum over positives, kept in integers: ascending ranks of a
    # tie group at descending positions [i..j] average to n - (i+j)/2.
    two_r = 0
    i = 0
    while i < n:
        j = i
        s = scores[order[i]]
        group_pos = pos[order[i]]
        while j + 1 < n and scores[order[j + 1]] == s:
            j += 1
            group_pos += pos[order[j]]
        two_r += group_pos * (2 * n - i - j)
        i = j + 1
    two_u = two_r - n_pos * (n_pos + 1)
    auc = two_u / (2 * n_pos * (n - n_pos))
    return ap, auc
