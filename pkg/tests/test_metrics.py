import random

import pytest

from layervote.errors import (
    DatasetMismatchError,
    EmptyConstituentsError,
    LengthMismatchError,
)
from layervote.metrics import (
    GAIN_VS_MEAN,
    GAIN_VS_MIN,
    ConfusionCounts,
    accuracy,
    dataset_layer_gain,
    first_layer_gain,
    layer_gain_stats,
    macro_f1,
    micro_f1,
    pairwise_ensemble_increase,
    round_score,
    total_gain,
)
from layervote.published import load_published_scores

SCORES = load_published_scores()


def gain_table(dataset, family=None):
    """model -> (run scores, ensemble score) from the bundled fixture."""
    table = {}
    for model in SCORES.model_ids():
        if family is not None and SCORES.family(model) != family:
            continue
        table[model] = (SCORES.run_scores(dataset, model), SCORES.ensemble_score(dataset, model))
    return table


class TestRoundScore:
    def test_half_up_not_bankers(self):
        assert round_score(0.125) == 0.13
        assert round_score(2.675) == 2.68
        assert round_score(97.545) == 97.55

    def test_negative_rounds_away_from_zero(self):
        assert round_score(-1.005) == -1.01

    def test_places(self):
        assert round_score(0.1234, 3) == 0.123
        assert round_score(1.0) == 1.0


class TestMicroF1:
    def test_perfect(self):
        assert micro_f1(["a", "b"], ["a", "b"]) == 100.0

    def test_all_wrong(self):
        assert micro_f1(["b", "a"], ["a", "b"]) == 0.0

    def test_counted_case_matches_hand_count(self):
        # 871 correct of 893
        gold = ["x"] * 893
        preds = ["x"] * 871 + ["y"] * 22
        assert round_score(micro_f1(preds, gold)) == 97.54

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            micro_f1(["a"], ["a", "b"])

    def test_equals_accuracy_on_random_instances(self):
        rng = random.Random(17)
        for _ in range(300):
            n = rng.randint(1, 40)
            labels = [f"l{i}" for i in range(rng.randint(2, 6))]
            gold = [rng.choice(labels) for _ in range(n)]
            preds = [rng.choice(labels) for _ in range(n)]
            assert micro_f1(preds, gold) == accuracy(preds, gold)


class TestMacroF1:
    def test_perfect(self):
        assert macro_f1(["a", "b", "c"], ["a", "b", "c"]) == 100.0

    def test_total_confusion_is_zero(self):
        assert macro_f1(["b", "b", "a", "a"], ["a", "a", "b", "b"]) == 0.0

    def test_hand_computed_case(self):
        got = macro_f1(["a", "b", "b", "c"], ["a", "a", "b", "c"])
        assert got == pytest.approx(77.78, abs=0.01)

    def test_absent_classes_excluded(self):
        # only label a ever appears; unseen labels contribute nothing
        assert macro_f1(["a", "a"], ["a", "a"]) == 100.0

    def test_relabeling_invariance(self):
        rng = random.Random(23)
        for _ in range(200):
            n = rng.randint(2, 30)
            labels = [f"l{i}" for i in range(4)]
            gold = [rng.choice(labels) for _ in range(n)]
            preds = [rng.choice(labels) for _ in range(n)]
            permuted = rng.sample(labels, len(labels))
            remap = dict(zip(labels, permuted))
            gold2 = [remap[g] for g in gold]
            preds2 = [remap[p] for p in preds]
            assert micro_f1(preds2, gold2) == micro_f1(preds, gold)
            assert macro_f1(preds2, gold2) == pytest.approx(macro_f1(preds, gold), abs=1e-9)


class TestConfusionCounts:
    def test_counts(self):
        counts = ConfusionCounts.from_predictions(["a", "b", "b"], ["a", "a", "b"])
        assert counts.tp == {"a": 1, "b": 1}
        assert counts.fp == {"b": 1}
        assert counts.fn == {"a": 1}
        assert counts.total == 3
        assert counts.labels() == {"a", "b"}


class TestFirstLayerGain:
    def test_vs_mean_published_row(self):
        got = first_layer_gain(97.20, [96.64, 96.75, 97.09], GAIN_VS_MEAN)
        assert got == pytest.approx(0.373, abs=0.001)

    def test_vs_min_published_row(self):
        got = first_layer_gain(97.31, [96.98, 97.20, 97.31], GAIN_VS_MIN)
        assert got == pytest.approx(0.33)

    def test_equal_constituents_zero(self):
        for mode in (GAIN_VS_MEAN, GAIN_VS_MIN):
            assert first_layer_gain(88.8, [88.8, 88.8, 88.8], mode) == pytest.approx(0.0)

    def test_empty_constituents(self):
        with pytest.raises(EmptyConstituentsError):
            first_layer_gain(90.0, [])

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            first_layer_gain(90.0, [89.0], "median")

    def test_translation_equivariance(self):
        rng = random.Random(31)
        for _ in range(200):
            scores = [rng.uniform(50, 99) for _ in range(rng.randint(1, 5))]
            ensemble = rng.uniform(50, 99)
            shift = rng.uniform(-10, 10)
            for mode in (GAIN_VS_MEAN, GAIN_VS_MIN):
                base = first_layer_gain(ensemble, scores, mode)
                shifted = first_layer_gain(ensemble + shift, [s + shift for s in scores], mode)
                assert shifted == pytest.approx(base, abs=1e-9)


class TestGainStats:
    def test_vs_min_dominates_vs_mean(self):
        rng = random.Random(41)
        for _ in range(200):
            table = {}
            for m in range(rng.randint(1, 6)):
                runs = [rng.uniform(60, 95) for _ in range(3)]
                table[f"m{m}"] = (runs, rng.uniform(60, 95))
            stats = layer_gain_stats(table)
            assert stats.gain_vs_min >= stats.gain_vs_mean - 1e-12

    def test_equal_runs_make_modes_agree(self):
        table = {"m": ([90.0, 90.0], 91.0)}
        stats = layer_gain_stats(table)
        assert stats.gain_vs_mean == stats.gain_vs_min == pytest.approx(1.0)
        assert stats.per_model["m"][GAIN_VS_MEAN] == pytest.approx(1.0)

    def test_empty_table(self):
        with pytest.raises(EmptyConstituentsError):
            layer_gain_stats({})


class TestDatasetLayerGain:
    def test_twelve_model_vs_mean_matches_reported(self):
        got = dataset_layer_gain(gain_table("atis"), GAIN_VS_MEAN)
        assert got == pytest.approx(0.54, abs=0.01)

    def test_rnn_vs_min_matches_prose(self):
        got = dataset_layer_gain(gain_table("atis", family="rnn"), GAIN_VS_MIN)
        assert got == pytest.approx(0.66, abs=0.01)
        got_smp = dataset_layer_gain(gain_table("smp", family="rnn"), GAIN_VS_MIN)
        assert got_smp == pytest.approx(2.66, abs=0.01)

    def test_all_reported_first_layer_gains(self):
        for dataset, expected in SCORES.reported_gains["first_layer"].items():
            got = dataset_layer_gain(gain_table(dataset), GAIN_VS_MEAN)
            assert got == pytest.approx(expected, abs=0.01), dataset


class TestTotalGain:
    def test_published_cases(self):
        assert round_score(total_gain(97.31, 97.54)) == 0.23
        assert round_score(total_gain(89.83, 91.79)) == 1.96
        assert round_score(total_gain(89.51, 93.55)) == 4.04

    def test_never_clamped(self):
        assert total_gain(95.0, 90.0) == pytest.approx(-5.0)

    def test_fixture_consistency(self):
        for dataset, expected in SCORES.reported_gains["total"].items():
            best_ind = SCORES.best_individual(dataset)
            best_second = SCORES.best_overall_ensembles[dataset]["f1"]
            assert total_gain(best_ind, best_second) == pytest.approx(expected, abs=0.005)


class TestPairwiseEnsembleIncrease:
    def test_no_increase(self):
        got = pairwise_ensemble_increase(
            {"d1": 90.0, "d2": 85.0},
            {"d1": [90.0, 90.0], "d2": [85.0, 85.0]},
        )
        assert got == pytest.approx(0.0)

    def test_single_dataset(self):
        got = pairwise_ensemble_increase({"d": 93.0}, {"d": [90.0, 92.0]})
        assert got == pytest.approx(2.0)

    def test_stated_definition_disagrees_with_reported_column(self):
        # recomputing the ABiCNN+CNN entry from per-ensemble scores yields
        # ~1.01, not the number printed beside it
        entry = next(
            e for e in SCORES.two_model_cnn_ensembles if e["members"] == ["ABiCNN", "CNN"]
        )
        member_a, member_b = entry["members"]
        ensemble_by_ds = {ds: entry["f1"][ds] for ds in SCORES.datasets}
        components_by_ds = {
            ds: [SCORES.ensemble_score(ds, member_a), SCORES.ensemble_score(ds, member_b)]
            for ds in SCORES.datasets
        }
        got = pairwise_ensemble_increase(ensemble_by_ds, components_by_ds, GAIN_VS_MEAN)
        assert got == pytest.approx(1.01, abs=0.01)
        assert abs(got - entry["reported_avg_increase"]) > 0.5

    def test_dataset_mismatch(self):
        with pytest.raises(DatasetMismatchError):
            pairwise_ensemble_increase({"d1": 90.0}, {"d2": [89.0]})

    def test_empty(self):
        with pytest.raises(EmptyConstituentsError):
            pairwise_ensemble_increase({}, {})


class TestAccuracy:
    def test_basic(self):
        assert accuracy(["a", "b", "c"], ["a", "b", "b"]) == pytest.approx(100 * 2 / 3)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            accuracy(["a"], [])
