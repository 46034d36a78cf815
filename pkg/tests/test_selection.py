"""Trace smoothing and checkpoint selection against exhaustive scans."""

import random

import pytest

import labelbalance as lb
from labelbalance.errors import EmptyFile, MalformedRow, TraceSkippedWarning, TraceTooShort
from labelbalance.selection import MetricTrace


def trace(values, metric="mAP", run_id="r", step0=0, stride=3000):
    points = tuple((step0 + i * stride, float(v)) for i, v in enumerate(values))
    return MetricTrace(points, metric, run_id)


def brute_select(tr, window):
    """Exhaustive scan over every full window."""
    values = [v for _, v in tr.points]
    n = len(values)
    best = None
    for i in range(n - window + 1):
        mean = sum(values[i:i + window]) / window
        step = tr.points[i + window // 2][0]
        if best is None or mean > best[1]:
            best = (step, mean)
    return best


class TestMovingAverage:
    def test_constant_trace(self):
        out = lb.moving_average(trace([5.0] * 9), window=7)
        assert [v for _, v in out.points] == [5.0, 5.0, 5.0]

    def test_hand_computed_ramp(self):
        out = lb.moving_average(trace(range(1, 11), stride=1, step0=0),
                                window=7)
        assert [v for _, v in out.points] == [4.0, 5.0, 6.0, 7.0]
        # centers sit at indices 3..6
        assert [s for s, _ in out.points] == [3, 4, 5, 6]

    def test_too_short(self):
        with pytest.raises(TraceTooShort):
            lb.moving_average(trace([1, 2, 3, 4, 5, 6]), window=7)

    def test_window_must_be_odd(self):
        with pytest.raises(ValueError):
            lb.moving_average(trace([1, 2, 3, 4]), window=4)
        with pytest.raises(ValueError):
            lb.moving_average(trace([1, 2, 3]), window=0)

    def test_output_length(self):
        out = lb.moving_average(trace(range(20)), window=5)
        assert len(out) == 16

    def test_shift_equivariance(self):
        rng = random.Random(3)
        values = [rng.random() for _ in range(15)]
        base = lb.moving_average(trace(values), window=5)
        shifted = lb.moving_average(trace([v + 10.0 for v in values]),
                                    window=5)
        for (s1, v1), (s2, v2) in zip(base.points, shifted.points):
            assert s1 == s2
            assert v2 == pytest.approx(v1 + 10.0, abs=1e-9)
        assert (lb.select_checkpoint(trace(values), 5)[0]
                == lb.select_checkpoint(trace([v + 10.0 for v in values]), 5)[0])


class TestSelectCheckpoint:
    def test_interior_peak(self):
        values = [0, 1, 2, 3, 9, 3, 2, 1, 0, 0, 0]
        step, value = lb.select_checkpoint(trace(values, stride=1), window=3)
        assert step == 4
        assert value == pytest.approx((3 + 9 + 3) / 3)

    def test_monotone_ramp_selects_last_center(self):
        values = list(range(12))
        step, value = lb.select_checkpoint(trace(values, stride=1), window=7)
        assert step == 8  # last valid center index
        assert value == pytest.approx(sum(range(5, 12)) / 7)

    def test_tie_earliest_step(self):
        values = [0, 5, 5, 5, 0, 0, 5, 5, 5, 0]
        step, _ = lb.select_checkpoint(trace(values, stride=1), window=3)
        assert step == 2  # first of the two equal plateaus

    def test_window_one_is_argmax(self):
        rng = random.Random(8)
        values = [rng.random() for _ in range(25)]
        step, value = lb.select_checkpoint(trace(values, stride=1), window=1)
        assert value == max(values)
        assert step == values.index(max(values))

    def test_matches_exhaustive_scan(self):
        rng = random.Random(55)
        for _ in range(100):
            n = rng.randint(7, 60)
            values = [rng.choice([0.0, 0.5, rng.random()]) for _ in range(n)]
            tr = trace(values, stride=1)
            for window in (1, 3, 5, 7):
                if n < window:
                    continue
                assert lb.select_checkpoint(tr, window) == \
                    brute_select(tr, window)

    def test_selected_value_dominates_all_centers(self):
        rng = random.Random(9)
        values = [rng.random() for _ in range(40)]
        tr = trace(values, stride=1)
        _, best = lb.select_checkpoint(tr, 7)
        smoothed = lb.moving_average(tr, 7)
        assert all(best >= v for _, v in smoothed.points)


class TestSelectAcrossRuns:
    def test_dominant_run_wins(self):
        t1 = trace([0.25] * 9, run_id="lr1")
        t2 = trace([0.75] * 9, run_id="lr2")
        assert lb.select_across_runs([t1, t2]) == ("lr2", t2.points[3][0], 0.75)

    def test_identical_traces_tie_to_first_run_id(self):
        t1 = trace([0.5] * 9, run_id="b")
        t2 = trace([0.5] * 9, run_id="a")
        run_id, _, _ = lb.select_across_runs([t1, t2])
        assert run_id == "a"

    def test_short_traces_skipped_with_warning(self):
        good = trace([0.3] * 9, run_id="good")
        short = trace([0.9, 0.9], run_id="short")
        with pytest.warns(TraceSkippedWarning):
            run_id, _, _ = lb.select_across_runs([short, good])
        assert run_id == "good"

    def test_all_short_raises(self):
        with pytest.warns(TraceSkippedWarning):
            with pytest.raises(TraceTooShort):
                lb.select_across_runs([trace([1.0], run_id="x")])

    def test_matches_brute_force_over_runs(self):
        rng = random.Random(77)
        for _ in range(50):
            traces = []
            for r in range(rng.randint(1, 5)):
                n = rng.randint(7, 30)
                traces.append(trace([rng.random() for _ in range(n)],
                                    run_id=f"run{r}", stride=1))
            got = lb.select_across_runs(traces, 7)
            candidates = []
            for tr in traces:
                step, value = brute_select(tr, 7)
                candidates.append((-value, tr.run_id, step))
            best = min(candidates)
            assert got == (best[1], best[2], -best[0])


class TestTraceParsing:
    def test_basic_with_headers(self):
        text = ("# metric: d_prime\n"
                "# run: lr-3e-5\n"
                "step,value\n"
                "0,0.5\n3000,0.625\n6000,0.75\n")
        tr = lb.parse_trace_csv(text)
        assert tr.metric_name == "d_prime"
        assert tr.run_id == "lr-3e-5"
        assert tr.points == ((0, 0.5), (3000, 0.625), (6000, 0.75))

    def test_run_id_fallback(self):
        tr = lb.parse_trace_csv("0,1.0\n5,2.0\n", run_id="fallback")
        assert tr.run_id == "fallback"

    def test_errors(self):
        with pytest.raises(EmptyFile):
            lb.parse_trace_csv("# metric: mAP\n")
        with pytest.raises(MalformedRow):
            lb.parse_trace_csv("0,1.0,9\n")
        with pytest.raises(MalformedRow):
            lb.parse_trace_csv("0,one\n")
        with pytest.raises(MalformedRow):
            lb.parse_trace_csv("5,1.0\n3,2.0\n")  # steps must increase

    def test_non_finite_value_rejected(self):
        with pytest.raises(MalformedRow):
            lb.parse_trace_csv("0,nan\n1,2.0\n")


class TestMetricTraceValidation:
    def test_strictly_increasing_steps(self):
        with pytest.raises(ValueError):
            MetricTrace(((0, 1.0), (0, 2.0)))

    def test_finite_values(self):
        with pytest.raises(ValueError):
            MetricTrace(((0, float("inf")),))
