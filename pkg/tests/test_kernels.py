"""Bit-compatibility of the compiled kernels with the pure-Python ones,
plus frozen values for the counter-based random stream."""

import random
from array import array

import pytest

from labelbalance import _kernels
from labelbalance._kernels import _pykernels
from labelbalance._prng import CounterStream, mix64

try:
    from labelbalance._kernels import _ckernels
except ImportError:
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None,
                               reason="compiled kernels not built")


class TestCounterStream:
    def test_frozen_reference_values(self):
        # Pinned so reimplementations in any language can check themselves.
        s = CounterStream(0)
        assert s.next_uint64() == 16294208416658607535
        assert s.next_uint64() == 7960286522194355700
        s42 = CounterStream(42)
        assert s42.next_uint64() == 13679457532755275413

    def test_mix64_is_counter_based(self):
        s = CounterStream(9)
        seq = [s.next_uint64() for _ in range(5)]
        gamma = 0x9E3779B97F4A7C15
        direct = [mix64((9 + (i + 1) * gamma) & (2**64 - 1)) for i in range(5)]
        assert seq == direct

    def test_doubles_in_unit_interval(self):
        s = CounterStream(123)
        for _ in range(1000):
            u = s.next_double()
            assert 0.0 <= u < 1.0


def _random_case(rng):
    n = rng.randint(2, 150)
    k = rng.randint(1, 25)
    flat = array("i")
    offsets = array("q", [0])
    for _ in range(n):
        labs = sorted(rng.sample(range(k), rng.randint(0, min(4, k))))
        flat.extend(labs)
        offsets.append(len(flat))
    priors = array("d", [rng.random() * 0.95 + 0.04 for _ in range(k)])
    return n, k, flat, offsets, priors


@needs_ext
class TestImplementationParity:
    """The two implementations must agree to the last bit."""

    def test_dataset_kernels(self):
        rng = random.Random(2024)
        for trial in range(150):
            n, k, flat, offsets, priors = _random_case(rng)
            beta = rng.choice([0.0, 0.1, 0.25, 0.5, 0.9, 1.0, 1.5])
            wc, uc = _ckernels.example_weights(flat, offsets, priors, beta)
            wp, up = _pykernels.example_weights(flat, offsets, priors, beta)
            assert uc == up
            assert wc.tobytes() == wp.tobytes()
            wmin = min(wc)
            fc = _ckernels.round_factors(wc, wmin)
            fp = _pykernels.round_factors(wp, wmin)
            assert fc == fp
            assert (_ckernels.weighted_counts(flat, offsets, fc, k)
                    == _pykernels.weighted_counts(flat, offsets, fp, k))
            assert (_ckernels.count_labels(flat, k)
                    == _pykernels.count_labels(flat, k))
            total = sum(fc)
            ec = _ckernels.expand_indices(fc, total)
            ep = _pykernels.expand_indices(fp, total)
            assert ec == ep
            _ckernels.shuffle_in_place(ec, trial)
            _pykernels.shuffle_in_place(ep, trial)
            assert ec == ep

    def test_rank_metrics(self):
        rng = random.Random(77)
        grid = [0.0, 0.25, 0.25, 0.5, 0.75, 1.0]
        for trial in range(300):
            n = rng.randint(2, 130)
            if trial % 2:
                scoring = [rng.choice(grid) for _ in range(n)]
            else:
                scoring = [rng.random() for _ in range(n)]
            scores = array("d", scoring)
            pos = bytearray(n)
            for r in rng.sample(range(n), rng.randint(1, n - 1)):
                pos[r] = 1
            for tie in (0, 1, 2):
                assert (_ckernels.rank_metrics(scores, pos, tie)
                        == _pykernels.rank_metrics(scores, pos, tie))

    def test_count_nonfinite(self):
        vals = array("d", [1.0, float("nan"), float("inf"), -2.5])
        assert _ckernels.count_nonfinite(vals) == 2
        assert _pykernels.count_nonfinite(vals) == 2


class TestPureKernels:
    def test_expand_matches_factors(self):
        factors = array("q", [1, 3, 2])
        out = _pykernels.expand_indices(factors, 6)
        assert list(out) == [0, 1, 1, 1, 2, 2]

    def test_shuffle_same_seed_same_permutation(self):
        a = array("i", range(50))
        b = array("i", range(50))
        _pykernels.shuffle_in_place(a, 99)
        _pykernels.shuffle_in_place(b, 99)
        assert a == b
        assert sorted(a) == list(range(50))

    def test_shuffle_different_seeds_differ(self):
        a = array("i", range(50))
        b = array("i", range(50))
        _pykernels.shuffle_in_place(a, 1)
        _pykernels.shuffle_in_place(b, 2)
        assert a != b

    def test_dispatch_exposes_impl_name(self):
        assert _kernels.ACTIVE_IMPL in ("c", "python")
