"""End-to-end CLI behavior: outputs, exit codes, determinism."""

import json

import pytest

import labelbalance as lb
from labelbalance.cli import main
from tests.conftest import VOCAB2_CSV

SEGMENTS_CSV = (
    "# test segments\n"
    '--abc, 0.0, 10.0, "/m/09x0r,/m/04rlf"\n'
    'b-one, 30.0, 40.0, "/m/09x0r"\n'
    'c-two, 5.0, 15.0, "/m/09x0r"\n'
    'd-tre, 1.0, 11.0, "/m/04rlf"\n'
)


@pytest.fixture
def files(tmp_path):
    vocab = tmp_path / "vocab.csv"
    vocab.write_text(VOCAB2_CSV)
    segments = tmp_path / "segments.csv"
    segments.write_text(SEGMENTS_CSV)
    return {"vocab": str(vocab), "segments": str(segments),
            "tmp": tmp_path}


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestStats:
    def test_json_matches_library(self, files, capsys):
        code, out, err = run_cli(capsys, "stats", files["segments"],
                                 "--vocab", files["vocab"])
        assert code == 0
        obj = json.loads(out)
        with open(files["segments"]) as fp:
            ds = lb.parse_segments_csv(fp, lb.parse_class_index_csv(
                open(files["vocab"]).read()))
        report = lb.imbalance_report(ds)
        assert obj["imbalance_ratio"] == report.imbalance_ratio
        assert obj["gini_eq3"] == report.gini_eq3
        assert obj["n_examples"] == 4

    def test_csv_format(self, files, capsys):
        code, out, _ = run_cli(capsys, "stats", files["segments"],
                               "--vocab", files["vocab"], "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "key,value"
        assert any(line.startswith("imbalance_ratio,") for line in lines)

    def test_byte_identical_rerun(self, files, capsys):
        _, out1, _ = run_cli(capsys, "stats", files["segments"],
                             "--vocab", files["vocab"])
        _, out2, _ = run_cli(capsys, "stats", files["segments"],
                             "--vocab", files["vocab"])
        assert out1 == out2

    def test_missing_vocab_is_usage_error(self, files, capsys):
        code, _, err = run_cli(capsys, "stats", files["segments"])
        assert code == 2
        assert json.loads(err.splitlines()[0])["error"] == "usage"

    def test_empty_file_domain_error(self, files, capsys):
        empty = files["tmp"] / "empty.csv"
        empty.write_text("# nothing\n")
        code, _, err = run_cli(capsys, "stats", str(empty),
                               "--vocab", files["vocab"])
        assert code == 1
        assert json.loads(err.splitlines()[0])["error"] == "EmptyFile"

    def test_missing_file(self, files, capsys):
        code, _, err = run_cli(capsys, "stats", "no-such-file.csv",
                               "--vocab", files["vocab"])
        assert code == 1

    def test_dataset_json_input_no_vocab_needed(self, files, capsys):
        code, out, _ = run_cli(capsys, "synth", "--classes", "5",
                               "--examples", "50", "--exponent", "1.0",
                               "--seed", "3", "--output",
                               str(files["tmp"] / "ds.json"))
        assert code == 0
        code, out, _ = run_cli(capsys, "stats", str(files["tmp"] / "ds.json"))
        assert code == 0
        assert json.loads(out)["n_classes"] == 5

    def test_output_file(self, files, capsys):
        dest = files["tmp"] / "report.json"
        code, out, _ = run_cli(capsys, "stats", files["segments"],
                               "--vocab", files["vocab"],
                               "--output", str(dest))
        assert code == 0
        assert out == ""
        assert json.loads(dest.read_text())["n_examples"] == 4


class TestPlan:
    def test_sweep_table_and_monotone_trend(self, files, capsys):
        code, out, _ = run_cli(capsys, "plan", files["segments"],
                               "--vocab", files["vocab"],
                               "--beta-sweep", "0,0.5,1.0")
        assert code == 0
        obj = json.loads(out)
        betas = [row["beta"] for row in obj["sweep"]]
        assert betas == [0.0, 0.5, 1.0]
        ratios = [row["imbalance_ratio"] for row in obj["sweep"]]
        assert ratios[0] >= ratios[1] >= ratios[2]

    def test_beta_zero_row_matches_stats(self, files, capsys):
        _, plan_out, _ = run_cli(capsys, "plan", files["segments"],
                                 "--vocab", files["vocab"], "--beta", "0")
        _, stats_out, _ = run_cli(capsys, "stats", files["segments"],
                                  "--vocab", files["vocab"])
        row = json.loads(plan_out)["sweep"][0]
        stats = json.loads(stats_out)
        assert row["imbalance_ratio"] == stats["imbalance_ratio"]
        assert row["gini_eq3"] == stats["gini_eq3"]
        assert row["expanded_size"] == stats["n_examples"]

    def test_plan_files_written(self, files, capsys):
        template = str(files["tmp"] / "plan_b{beta}.json")
        code, out, _ = run_cli(capsys, "plan", files["segments"],
                               "--vocab", files["vocab"],
                               "--beta-sweep", "0,1",
                               "--plan-out", template)
        assert code == 0
        plan = lb.plan_from_json(
            (files["tmp"] / "plan_b1.json").read_text())
        assert plan.beta == 1.0
        assert sum(plan.factors) == plan.expanded_size

    def test_csv_table(self, files, capsys):
        code, out, _ = run_cli(capsys, "plan", files["segments"],
                               "--vocab", files["vocab"],
                               "--beta-sweep", "0,1", "--format", "csv")
        lines = out.splitlines()
        assert lines[0] == "beta,imbalance_ratio,gini_eq3,expanded_size"
        assert len(lines) == 3

    def test_extended_beta_needs_flag(self, files, capsys):
        code, _, err = run_cli(capsys, "plan", files["segments"],
                               "--vocab", files["vocab"], "--beta", "1.5")
        assert code == 2
        code, out, err = run_cli(capsys, "plan", files["segments"],
                                 "--vocab", files["vocab"], "--beta", "1.5",
                                 "--allow-extended")
        assert code == 0
        warned = [json.loads(line) for line in err.splitlines()]
        assert any(w.get("warning") == "ExtendedBetaWarning" for w in warned)

    def test_both_beta_flags_usage_error(self, files, capsys):
        code, _, _ = run_cli(capsys, "plan", files["segments"],
                             "--vocab", files["vocab"],
                             "--beta", "0.5", "--beta-sweep", "0,1")
        assert code == 2

    def test_factors_sidecar(self, files, capsys):
        template = str(files["tmp"] / "factors_{beta}.txt")
        code, _, _ = run_cli(capsys, "plan", files["segments"],
                             "--vocab", files["vocab"], "--beta", "1",
                             "--factors-out", template)
        assert code == 0
        factors = [int(x) for x in
                   (files["tmp"] / "factors_1.txt").read_text().split()]
        assert len(factors) == 4
        assert min(factors) == 1


class TestExpandAndBatches:
    @pytest.fixture
    def plan_file(self, files, capsys):
        template = str(files["tmp"] / "plan{beta}.json")
        run_cli(capsys, "plan", files["segments"], "--vocab", files["vocab"],
                "--beta", "1", "--plan-out", template)
        return str(files["tmp"] / "plan1.json")

    def test_expand_counts_match_factors(self, plan_file, files, capsys):
        code, out, _ = run_cli(capsys, "expand", plan_file)
        assert code == 0
        indices = [int(x) for x in out.split()]
        plan = lb.plan_from_json(open(plan_file).read())
        assert len(indices) == plan.expanded_size
        for j, f in enumerate(plan.factors):
            assert indices.count(j) == f

    def test_expand_seeded_deterministic(self, plan_file, capsys):
        _, out1, _ = run_cli(capsys, "expand", plan_file, "--seed", "5")
        _, out2, _ = run_cli(capsys, "expand", plan_file, "--seed", "5")
        _, out3, _ = run_cli(capsys, "expand", plan_file, "--seed", "6")
        assert out1 == out2
        assert out1 != out3

    def test_expand_ceiling(self, plan_file, capsys):
        code, _, err = run_cli(capsys, "expand", plan_file,
                               "--max-size", "2")
        assert code == 1
        assert json.loads(err.splitlines()[0])["error"] == "OverflowRisk"

    def test_simulate_batches(self, plan_file, capsys):
        code, out, _ = run_cli(capsys, "simulate-batches", plan_file,
                               "--batch-size", "8")
        assert code == 0
        obj = json.loads(out)
        assert obj["batch_size"] == 8
        plan = lb.plan_from_json(open(plan_file).read())
        cov = lb.batch_coverage(plan, 8)
        assert obj["expected"] == list(cov.expected)
        assert obj["rarest"]["index"] == cov.rarest_index

    def test_simulate_batches_csv(self, plan_file, capsys):
        code, out, _ = run_cli(capsys, "simulate-batches", plan_file,
                               "--format", "csv")
        lines = out.splitlines()
        assert lines[0].startswith("# batch_size: 1024")
        assert lines[2] == "index,expected"


def write_eval_fixture(tmp_path, perfect=True):
    labels = tmp_path / "eval_labels.csv"
    labels.write_text(
        'e0, 0.0, 10.0, "/m/09x0r"\n'
        'e1, 0.0, 10.0, "/m/09x0r,/m/04rlf"\n'
        'e2, 0.0, 10.0, "/m/04rlf"\n'
        'e3, 0.0, 10.0, ""\n'
    )
    if perfect:
        rows = ["e0,1.0,0.0", "e1,1.0,1.0", "e2,0.0,1.0", "e3,0.0,0.0"]
    else:
        rows = ["e0,0.6,0.4", "e1,0.5,0.9", "e2,0.7,0.8", "e3,0.2,0.1"]
    scores = tmp_path / ("scores_perfect.csv" if perfect else "scores_b.csv")
    scores.write_text("example_id,/m/09x0r,/m/04rlf\n"
                      + "\n".join(rows) + "\n")
    return str(labels), str(scores)


class TestEvalAndCompare:
    def test_perfect_scores(self, files, capsys):
        labels, scores = write_eval_fixture(files["tmp"], perfect=True)
        code, out, err = run_cli(capsys, "eval", labels,
                                 "--vocab", files["vocab"],
                                 "--scores", scores)
        assert code == 0
        obj = json.loads(out)
        assert obj["map"] == 1.0
        assert obj["macro_auc"] == 1.0
        assert obj["d_prime"] > 10
        warned = [json.loads(line) for line in err.splitlines()]
        assert any(w.get("warning") == "ClampedValueWarning" for w in warned)

    def test_eval_csv_output(self, files, capsys):
        labels, scores = write_eval_fixture(files["tmp"], perfect=False)
        code, out, _ = run_cli(capsys, "eval", labels,
                               "--vocab", files["vocab"],
                               "--scores", scores, "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert lines[4] == "index,mid,ap,auc,n_pos"
        assert len(lines) == 7

    def test_eval_binary_scores(self, files, capsys):
        labels_path, _ = write_eval_fixture(files["tmp"], perfect=False)
        with open(files["vocab"]) as fp:
            vocab = lb.parse_class_index_csv(fp)
        with open(labels_path) as fp:
            labels = lb.parse_segments_csv(fp, vocab)
        run = lb.EvalRun.from_rows(
            [[0.5, 0.25], [0.5, 0.75], [0.25, 1.0], [0.0, 0.5]],
            labels, "bin")
        path = str(files["tmp"] / "scores.scmx")
        lb.write_scores_binary(run, path)
        code, out, _ = run_cli(capsys, "eval", labels_path,
                               "--vocab", files["vocab"], "--scores", path)
        assert code == 0
        assert json.loads(out)["run_id"] == "bin"

    def test_compare_self_is_null_effect(self, files, capsys):
        labels, scores = write_eval_fixture(files["tmp"], perfect=False)
        rep = str(files["tmp"] / "rep.json")
        run_cli(capsys, "eval", labels, "--vocab", files["vocab"],
                "--scores", scores, "--run-id", "base", "--output", rep)
        # regression needs >= 3 classes, so only check deltas here
        code, out, _ = run_cli(capsys, "compare", rep, rep)
        assert code == 0
        obj = json.loads(out)
        assert obj["mean_delta_ap"] == 0.0
        assert all(d["delta_ap"] == 0.0 and d["delta_auc"] == 0.0
                   for d in obj["deltas"])
        assert obj["regression"] is None

    def test_compare_with_regression(self, files, capsys):
        # synthetic dataset with enough classes for the regression
        ds_path = str(files["tmp"] / "synth.json")
        run_cli(capsys, "synth", "--classes", "6", "--examples", "200",
                "--exponent", "1.0", "--seed", "4", "--output", ds_path)
        ds = lb.dataset_from_json(open(ds_path).read())
        import random
        rng = random.Random(12)
        rows_a, rows_b = [], []
        for _ in range(ds.n_examples):
            rows_a.append([rng.random() for _ in range(6)])
            rows_b.append([rng.random() for _ in range(6)])
        run_a = lb.EvalRun.from_rows(rows_a, ds, "a")
        run_b = lb.EvalRun.from_rows(rows_b, ds, "b")
        rep_a = str(files["tmp"] / "a.json")
        rep_b = str(files["tmp"] / "b.json")
        from labelbalance.metrics import metric_report_to_json
        open(rep_a, "w").write(metric_report_to_json(lb.macro_report(run_a)))
        open(rep_b, "w").write(metric_report_to_json(lb.macro_report(run_b)))
        code, out, _ = run_cli(capsys, "compare", rep_a, rep_b,
                               "--train-labels", ds_path)
        assert code == 0
        obj = json.loads(out)
        assert obj["regression"] is not None
        assert set(obj["regression"]) == {
            "slope", "intercept", "r_squared", "t_statistic", "p_value",
            "degrees_of_freedom"}
        assert 0.0 <= obj["regression"]["p_value"] <= 1.0
        # a report against itself: null effect, flat regression
        code, out, _ = run_cli(capsys, "compare", rep_a, rep_a,
                               "--train-labels", ds_path)
        assert code == 0
        obj = json.loads(out)
        assert obj["mean_delta_ap"] == 0.0
        assert obj["regression"]["slope"] == 0.0
        assert obj["regression"]["p_value"] == 1.0

    def test_compare_csv_fig_layout(self, files, capsys):
        labels, scores = write_eval_fixture(files["tmp"], perfect=False)
        rep = str(files["tmp"] / "rep.json")
        run_cli(capsys, "eval", labels, "--vocab", files["vocab"],
                "--scores", scores, "--output", rep)
        code, out, _ = run_cli(capsys, "compare", rep, rep,
                               "--train-labels", files["segments"],
                               "--vocab", files["vocab"],
                               "--format", "csv")
        assert code == 0
        assert out.splitlines()[0] == "mid,log10_prior,delta_ap,delta_auc"


class TestSelect:
    def test_ramp_fixture_selects_last_center(self, files, capsys):
        path = files["tmp"] / "trace.csv"
        path.write_text("# metric: mAP\n" + "".join(
            f"{i},{i / 100}\n" for i in range(12)))
        code, out, _ = run_cli(capsys, "select", str(path))
        assert code == 0
        obj = json.loads(out)
        assert obj["selected"]["step"] == 8  # last full-window center
        assert obj["selected"]["run_id"] == "trace.csv"

    def test_prefers_dprime_traces_by_default(self, files, capsys):
        map_tr = files["tmp"] / "map.csv"
        map_tr.write_text("# metric: mAP\n" + "".join(
            f"{i},{0.9}\n" for i in range(9)))
        dp_tr = files["tmp"] / "dp.csv"
        dp_tr.write_text("# metric: d_prime\n" + "".join(
            f"{i},{0.5}\n" for i in range(9)))
        code, out, _ = run_cli(capsys, "select", str(map_tr), str(dp_tr))
        obj = json.loads(out)
        assert obj["selected"]["run_id"] == "dp.csv"
        code, out, _ = run_cli(capsys, "select", str(map_tr), str(dp_tr),
                               "--metric", "mAP")
        assert json.loads(out)["selected"]["run_id"] == "map.csv"

    def test_unknown_metric_usage_error(self, files, capsys):
        path = files["tmp"] / "t.csv"
        path.write_text("0,1.0\n1,1.0\n2,1.0\n3,1.0\n4,1.0\n5,1.0\n6,1.0\n")
        code, _, _ = run_cli(capsys, "select", str(path), "--metric", "nope")
        assert code == 2


class TestSynth:
    def test_deterministic_output(self, files, capsys):
        args = ("synth", "--classes", "4", "--examples", "30",
                "--exponent", "1.5", "--labels-per-example", "2.0",
                "--seed", "9")
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)
        assert out1 == out2
        ds = lb.dataset_from_json(out1)
        assert ds.n_examples == 30


class TestUsage:
    def test_no_command(self, capsys):
        assert main([]) == 2

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_version(self, capsys):
        assert main(["--version"]) == 0
