import math

import numpy as np
import pytest

import ontocohort as oc
from ontocohort.data import PhenotypeVocabulary, VisitDataset, VisitRecord
from ontocohort.errors import SingleClass, SizeTooLarge, TooFewVisits
from ontocohort.evaluate import logistic_loss_grad, predict_scores

VOCAB = PhenotypeVocabulary(names=("p1", "p2"))


# --- AUC


def pairwise_auc(scores, labels):
    """O(n^2) oracle: count positive/negative pairs directly."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestAuc:
    def test_perfect_separation(self):
        assert oc.auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_perfect_inversion(self):
        assert oc.auc([0.9, 0.8, 0.1, 0.2], [0, 0, 1, 1]) == 0.0

    def test_all_tied_is_half(self):
        assert oc.auc([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5

    def test_partial_ties_hand_counted(self):
        # pairs: (0.7,0.3)=win, (0.7,0.7)=half, (0.5,0.3)=win, (0.5,0.7)=loss
        # => (1 + 0.5 + 1 + 0) / 4
        scores = [0.3, 0.7, 0.7, 0.5]
        labels = [0, 1, 0, 1]
        assert oc.auc(scores, labels) == pytest.approx(2.5 / 4)

    def test_matches_pairwise_oracle_randomized(self):
        rng = np.random.default_rng(555)
        for _ in range(30):
            n = int(rng.integers(4, 60))
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            # quantized scores force plenty of ties
            scores = np.round(rng.random(n), 1)
            assert oc.auc(scores, labels) == pytest.approx(
                pairwise_auc(scores, labels), abs=1e-12
            )

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(88)
        scores = rng.random(40)
        labels = rng.integers(0, 2, size=40)
        labels[0], labels[1] = 0, 1
        base = oc.auc(scores, labels)
        assert oc.auc(3.0 * scores + 2.0, labels) == pytest.approx(base)
        assert oc.auc(np.exp(scores), labels) == pytest.approx(base)

    def test_complement_symmetry(self):
        rng = np.random.default_rng(13)
        scores = rng.random(30)
        labels = rng.integers(0, 2, size=30)
        labels[0], labels[1] = 0, 1
        assert oc.auc(scores, labels) + oc.auc(-scores, labels) == pytest.approx(1.0)

    def test_single_class_raises(self):
        with pytest.raises(SingleClass):
            oc.auc([0.1, 0.2], [1, 1])

    def test_null_scores_near_half(self):
        rng = np.random.default_rng(2024)
        n = 2000
        labels = rng.integers(0, 2, size=n)
        scores = rng.random(n)
        assert 0.45 < oc.auc(scores, labels) < 0.55


# --- logistic regression internals


class TestLogisticTraining:
    def test_gradient_matches_central_finite_differences(self):
        rng = np.random.default_rng(9)
        h = 1e-6
        for _ in range(3):
            n, d = int(rng.integers(10, 30)), int(rng.integers(2, 5))
            x = rng.normal(size=(n, d))
            y = rng.integers(0, 2, size=n).astype(float)
            for _ in range(5):
                w = rng.normal(scale=0.5, size=d + 1)
                _, grad = logistic_loss_grad(w, x, y, l2=0.01)
                for k in range(d + 1):
                    e = np.zeros(d + 1)
                    e[k] = h
                    lp, _ = logistic_loss_grad(w + e, x, y, l2=0.01)
                    lm, _ = logistic_loss_grad(w - e, x, y, l2=0.01)
                    fd = (lp - lm) / (2 * h)
                    assert grad[k] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_loss_non_increasing(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(80, 3))
        w_true = np.array([0.2, 1.0, -1.5, 0.7])
        p = 1 / (1 + np.exp(-(np.hstack([np.ones((80, 1)), x]) @ w_true)))
        y = (rng.random(80) < p).astype(float)
        result = oc.train_logistic(x, y, oc.TrainConfig(learning_rate=0.5, iterations=300))
        assert not result.degenerate
        diffs = np.diff(result.losses)
        assert np.all(diffs <= 1e-12)

    def test_separable_data_reaches_auc_one(self):
        x = np.array([[v] for v in (-2.0, -1.5, -1.0, 1.0, 1.5, 2.0)])
        y = np.array([0, 0, 0, 1, 1, 1], dtype=float)
        result = oc.train_logistic(x, y, oc.TrainConfig(learning_rate=1.0, iterations=400))
        scores = predict_scores(result.weights, x)
        assert oc.auc(scores, y) == 1.0

    def test_intercept_not_penalized(self):
        # with pure-intercept data, heavy l2 must not pull the fitted
        # intercept toward zero: the model should still match base rate
        y = np.array([1.0] * 30 + [0.0] * 10)
        x = np.zeros((40, 1))
        result = oc.train_logistic(
            x, y, oc.TrainConfig(learning_rate=1.0, iterations=2000, l2=10.0)
        )
        p_hat = predict_scores(result.weights, np.zeros((1, 1)))[0]
        assert p_hat == pytest.approx(0.75, abs=0.01)

    def test_single_class_degenerate(self):
        result = oc.train_logistic(np.zeros((5, 2)), np.ones(5))
        assert result.degenerate

    def test_nan_features_rejected(self):
        x = np.zeros((4, 2))
        x[1, 0] = np.nan
        with pytest.raises(ValueError):
            oc.train_logistic(x, np.array([0.0, 1.0, 0.0, 1.0]))

    def test_zero_init_determinism(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=(50, 4))
        y = rng.integers(0, 2, size=50).astype(float)
        a = oc.train_logistic(x, y)
        b = oc.train_logistic(x, y)
        assert np.array_equal(a.weights, b.weights)


# --- folds


def oracle_folds(visit_ids, labels, k, seed):
    """Same split rule, written independently with explicit index math."""
    rng = np.random.default_rng(seed)
    by_class = {}
    for cls in (1, 0):
        ids = sorted(v for v in visit_ids if labels[v] == cls)
        perm = rng.permutation(len(ids))
        by_class[cls] = [ids[i] for i in perm]
    folds = [[] for _ in range(k)]
    for cls in (1, 0):
        for i, v in enumerate(by_class[cls]):
            folds[i % k].append(v)
    return folds


class TestStratifiedFolds:
    def test_partition(self):
        ids = [f"v{i}" for i in range(23)]
        labels = {v: 1 if i % 3 == 0 else 0 for i, v in enumerate(ids)}
        folds = oc.stratified_folds(ids, labels, 4, seed=1)
        flat = [v for f in folds for v in f]
        assert sorted(flat) == sorted(ids)
        assert len(flat) == len(set(flat))

    def test_class_balance_within_one(self):
        ids = [f"v{i}" for i in range(40)]
        labels = {v: 1 if i < 12 else 0 for i, v in enumerate(ids)}
        folds = oc.stratified_folds(ids, labels, 3, seed=5)
        pos_counts = [sum(labels[v] for v in f) for f in folds]
        assert max(pos_counts) - min(pos_counts) <= 1

    def test_matches_independent_split_oracle(self):
        rng = np.random.default_rng(321)
        for trial in range(10):
            n = int(rng.integers(8, 40))
            ids = [f"id{i:03d}" for i in range(n)]
            labels = {v: int(rng.integers(0, 2)) for v in ids}
            k = int(rng.integers(2, 5))
            got = oc.stratified_folds(ids, labels, k, seed=trial)
            want = oracle_folds(ids, labels, k, seed=trial)
            assert got == want

    def test_input_order_independence(self):
        ids = [f"v{i}" for i in range(15)]
        labels = {v: i % 2 for i, v in enumerate(ids)}
        a = oc.stratified_folds(ids, labels, 3, seed=9)
        b = oc.stratified_folds(list(reversed(ids)), labels, 3, seed=9)
        assert a == b


# --- cross_validate


def make_eval_dataset(n=60, informative=True, seed=0, short_every=None):
    rng = np.random.default_rng(seed)
    visits = {}
    for i in range(n):
        label = int(i % 2)
        if informative:
            features = (label * 2.0 + rng.normal(scale=0.3), rng.normal())
        else:
            features = (rng.normal(), rng.normal())
        duration = 5.0 if (short_every and i % short_every == 0) else 50.0
        visits[f"v{i:03d}"] = VisitRecord(
            visit_id=f"v{i:03d}",
            patient_id=f"pt{i}",
            codes=frozenset({"A"}),
            phenotypes=frozenset({"p1"}),
            features=features,
            labels={"outcome": label},
            duration_hours=duration,
        )
    return VisitDataset(visits=visits, vocabulary=VOCAB, feature_dim=2)


TASK = oc.TaskSpec(name="outcome", label_key="outcome")


class TestCrossValidate:
    def test_informative_features_beat_chance(self):
        ds = make_eval_dataset(informative=True)
        report = oc.cross_validate(ds, list(ds.visits), TASK, k=3, seed=0)
        assert report.auc_mean > 0.9
        assert len(report.fold_aucs) == 3
        assert report.flagged_folds == []

    def test_determinism(self):
        ds = make_eval_dataset()
        a = oc.cross_validate(ds, list(ds.visits), TASK, k=3, seed=7)
        b = oc.cross_validate(ds, list(ds.visits), TASK, k=3, seed=7)
        assert a.fold_aucs == b.fold_aucs
        assert a.to_dict() == b.to_dict()

    def test_counts_and_seed_echo(self):
        ds = make_eval_dataset(n=50)
        report = oc.cross_validate(ds, list(ds.visits), TASK, k=5, seed=3)
        assert report.visit_count == 50
        assert report.positive_count == 25
        assert report.negative_count == 25
        assert report.seed == 3

    def test_duration_exclusion(self):
        ds = make_eval_dataset(n=60, short_every=3)
        task = oc.TaskSpec(name="outcome", label_key="outcome", min_duration_hours=24.0)
        report = oc.cross_validate(ds, list(ds.visits), task, k=3, seed=0)
        assert report.visit_count == 40  # every third visit is under 24h

    def test_visits_without_label_skipped(self):
        ds = make_eval_dataset(n=30)
        extra = dict(ds.visits)
        extra["vxxx"] = VisitRecord(
            visit_id="vxxx",
            patient_id="px",
            codes=frozenset({"A"}),
            phenotypes=frozenset(),
            features=(0.0, 0.0),
            labels={},
            duration_hours=50.0,
        )
        ds2 = VisitDataset(visits=extra, vocabulary=VOCAB, feature_dim=2)
        report = oc.cross_validate(ds2, list(ds2.visits), TASK, k=3, seed=0)
        assert report.visit_count == 30

    def test_too_few_visits(self):
        ds = make_eval_dataset(n=2)
        with pytest.raises(TooFewVisits):
            oc.cross_validate(ds, list(ds.visits), TASK, k=3, seed=0)

    def test_single_class_folds_flagged_not_fatal(self):
        # one positive in 12 visits: with k=3 it lands in a single fold,
        # leaving the other training splits fine but its own test split
        # and at least one configuration degenerate
        visits = {}
        for i in range(12):
            label = 1 if i == 0 else 0
            visits[f"v{i:02d}"] = VisitRecord(
                visit_id=f"v{i:02d}",
                patient_id=f"pt{i}",
                codes=frozenset({"A"}),
                phenotypes=frozenset(),
                features=(float(label), 0.5),
                labels={"outcome": label},
                duration_hours=50.0,
            )
        ds = VisitDataset(visits=visits, vocabulary=VOCAB, feature_dim=2)
        report = oc.cross_validate(ds, list(ds.visits), TASK, k=3, seed=0)
        assert report.flagged_folds  # at least the fold holding the positive
        for i in report.flagged_folds:
            assert math.isnan(report.fold_aucs[i])
        assert report.to_dict()["fold_aucs"].count(None) == len(report.flagged_folds)

    def test_duplicate_ids_deduplicated(self):
        ds = make_eval_dataset(n=30)
        ids = list(ds.visits) + list(ds.visits)[:10]
        report = oc.cross_validate(ds, ids, TASK, k=3, seed=0)
        assert report.visit_count == 30


# --- baselines


def counted_dataset():
    visits = {}
    for i in range(20):
        code = "B" if i < 8 else "C"
        phen = "p1" if i % 2 == 0 else "p2"
        visits[f"v{i:02d}"] = VisitRecord(
            visit_id=f"v{i:02d}",
            patient_id="p",
            codes=frozenset({code}),
            phenotypes=frozenset({phen}),
            features=(0.0,),
            labels={"outcome": i % 2},
            duration_hours=10.0,
        )
    ds = VisitDataset(visits=visits, vocabulary=VOCAB, feature_dim=1)
    # C sits under the seed so its 12 visits stay in the sampling pool
    graph = oc.build_graph([("A", "B"), ("B", "C")], ds)
    spec = oc.FilterSpec(
        selected_codes=frozenset({"B"}),
        phenotypes_of_interest=frozenset({"p1"}),
        min_visits=0,
        min_phenotype_count=0,
    )
    return oc.filter_graph(graph, spec, ds), spec, ds


class TestBaselineCohorts:
    def test_target_is_seed_visits_with_phenotype(self):
        fg, spec, ds = counted_dataset()
        cohorts = oc.build_baseline_cohorts(fg, spec, ds, [])
        # seed B has visits v00..v07; phenotype p1 on the even ones
        assert cohorts["target"] == [f"v{i:02d}" for i in range(0, 8, 2)]

    def test_random_supersets_of_target(self):
        fg, spec, ds = counted_dataset()
        cohorts = oc.build_baseline_cohorts(fg, spec, ds, [10, 15], seed=2)
        target = set(cohorts["target"])
        assert len(cohorts["random_10"]) == 10
        assert len(cohorts["random_15"]) == 15
        # every baseline contains the target and draws only from the
        # filtered graph's visit pool (the draws themselves are independent)
        pool = fg.distinct_visit_ids() | target
        for name in ("random_10", "random_15"):
            assert target <= set(cohorts[name]) <= pool

    def test_size_below_target_returns_target(self):
        fg, spec, ds = counted_dataset()
        cohorts = oc.build_baseline_cohorts(fg, spec, ds, [2], seed=0)
        assert cohorts["random_2"] == cohorts["target"]

    def test_size_too_large(self):
        fg, spec, ds = counted_dataset()
        with pytest.raises(SizeTooLarge):
            oc.build_baseline_cohorts(fg, spec, ds, [10_000])

    def test_seeded_determinism(self):
        fg, spec, ds = counted_dataset()
        a = oc.build_baseline_cohorts(fg, spec, ds, [12], seed=5)
        b = oc.build_baseline_cohorts(fg, spec, ds, [12], seed=5)
        c = oc.build_baseline_cohorts(fg, spec, ds, [12], seed=6)
        assert a == b
        assert a != c


class TestReportTable:
    def test_columns_and_nan_rendering(self):
        reports = [
            oc.EvalReport(
                cohort_name="target",
                visit_count=120,
                positive_count=40,
                negative_count=80,
                auc_mean=0.7033,
                auc_std=0.021,
                fold_aucs=[0.69, 0.70, 0.72],
                seed=0,
            ),
            oc.EvalReport(
                cohort_name="broken",
                visit_count=4,
                positive_count=4,
                negative_count=0,
                auc_mean=float("nan"),
                auc_std=float("nan"),
                fold_aucs=[float("nan")] * 3,
                seed=0,
                flagged_folds=[0, 1, 2],
            ),
        ]
        table = oc.format_report_table(reports)
        lines = table.strip().split("\n")
        assert lines[0].split()[:2] == ["cohort", "visits"]
        assert "0.70(0.02)" in table
        assert "n/a" in table
        assert "120 visits (40 +, 80 -)" in table
