import numpy as np
import pytest

from posegest import CLASS_LABELS, ConfusionMatrix, render_report, report

# Hand-checked two-class example, rows = true, columns = predicted:
#   [[5, 1],
#    [2, 4]]
# class 0: P = 5/7, R = 5/6, F1 = 50/65 = 10/13
# class 1: P = 4/5, R = 4/6, F1 = 16/22 = 8/11
# accuracy = 9/12
HAND_COUNTS = np.array([[5, 1], [2, 4]])

GOLDEN_RENDER = (
    "class  precision     recall         f1  support\n"
    "-----------------------------------------------\n"
    "cat       0.7143     0.8333     0.7692        6\n"
    "dog       0.8000     0.6667     0.7273        6\n"
    "-----------------------------------------------\n"
    "macro     0.7571     0.7500     0.7483       12\n"
    "accuracy  0.7500\n"
    "\n"
    "confusion matrix (rows = true, columns = predicted)\n"
    "         cat    dog\n"
    "cat        5      1\n"
    "dog        2      4\n"
)


class TestConfusionMatrix:
    def test_default_labels_and_zero_counts(self):
        cm = ConfusionMatrix()
        assert cm.labels == CLASS_LABELS
        assert cm.counts.shape == (8, 8)
        assert cm.total == 0

    def test_accumulate_and_weight(self):
        cm = ConfusionMatrix(("a", "b"))
        cm.accumulate(0, 0)
        cm.accumulate(0, 1, weight=3)
        cm.accumulate(1, 1)
        assert cm.counts.tolist() == [[1, 3], [0, 1]]
        assert cm.total == 5

    def test_accumulate_rejects_out_of_range(self):
        cm = ConfusionMatrix(("a", "b"))
        with pytest.raises(ValueError):
            cm.accumulate(2, 0)
        with pytest.raises(ValueError):
            cm.accumulate(0, -1)

    def test_shape_and_negative_validation(self):
        with pytest.raises(ValueError):
            ConfusionMatrix(("a", "b"), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            ConfusionMatrix(("a", "b"), np.array([[1, -1], [0, 0]]))

    def test_merge_is_cellwise_sum(self):
        a = ConfusionMatrix(("x", "y"), np.array([[1, 2], [3, 4]]))
        b = ConfusionMatrix(("x", "y"), np.array([[10, 0], [0, 10]]))
        merged = a.merge(b)
        assert merged.counts.tolist() == [[11, 2], [3, 14]]
        # inputs untouched
        assert a.counts.tolist() == [[1, 2], [3, 4]]

    def test_merge_rejects_label_mismatch(self):
        a = ConfusionMatrix(("x", "y"))
        b = ConfusionMatrix(("x", "z"))
        with pytest.raises(ValueError):
            a.merge(b)


class TestReport:
    def test_hand_checked_two_class(self):
        rep = report(ConfusionMatrix(("cat", "dog"), HAND_COUNTS))
        assert rep.precision[0] == pytest.approx(5 / 7, rel=1e-15)
        assert rep.recall[0] == pytest.approx(5 / 6, rel=1e-15)
        assert rep.f1[0] == pytest.approx(10 / 13, rel=1e-15)
        assert rep.precision[1] == pytest.approx(4 / 5, rel=1e-15)
        assert rep.recall[1] == pytest.approx(2 / 3, rel=1e-15)
        assert rep.f1[1] == pytest.approx(8 / 11, rel=1e-15)
        assert rep.accuracy == pytest.approx(0.75, rel=1e-15)
        assert rep.support == [6, 6]
        assert rep.macro_precision == pytest.approx(53 / 70, rel=1e-12)
        assert rep.macro_recall == pytest.approx(0.75, rel=1e-12)
        assert rep.macro_f1 == pytest.approx(107 / 143, rel=1e-12)
        assert (rep.undefined_precision, rep.undefined_recall, rep.undefined_f1) == (0, 0, 0)

    def test_perfect_predictions(self):
        rep = report(ConfusionMatrix(("a", "b", "c"), np.diag([3, 5, 2])))
        assert rep.precision == [1.0, 1.0, 1.0]
        assert rep.recall == [1.0, 1.0, 1.0]
        assert rep.f1 == [1.0, 1.0, 1.0]
        assert rep.accuracy == 1.0

    def test_empty_matrix_is_all_undefined(self):
        rep = report(ConfusionMatrix(("a", "b")))
        assert rep.precision == [None, None]
        assert rep.recall == [None, None]
        assert rep.f1 == [None, None]
        assert rep.accuracy is None
        assert rep.macro_f1 is None
        assert rep.undefined_f1 == 2

    def test_never_predicted_class_has_undefined_precision(self):
        # class 1 never appears in any prediction column
        counts = np.array([[4, 0], [2, 0]])
        rep = report(ConfusionMatrix(("a", "b"), counts))
        assert rep.precision[1] is None
        assert rep.recall[1] == 0.0
        assert rep.f1[1] is None
        assert rep.undefined_precision == 1
        assert rep.undefined_f1 == 1
        # macro precision averages only the defined entry
        assert rep.macro_precision == pytest.approx(4 / 6, rel=1e-15)

    def test_zero_precision_and_recall_gives_undefined_f1(self):
        # class 0 has predictions and true rows but zero hits: P = R = 0, F1 undefined
        counts = np.array([[0, 3], [2, 1]])
        rep = report(ConfusionMatrix(("a", "b"), counts))
        assert rep.precision[0] == 0.0
        assert rep.recall[0] == 0.0
        assert rep.f1[0] is None

    def test_random_matrices_identities(self):
        # accuracy = trace/total; recall = diag/row sums; micro-averaged
        # precision equals accuracy for single-label classification
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            counts = rng.integers(1, 50, size=(n, n))
            cm = ConfusionMatrix(tuple(f"c{i}" for i in range(n)), counts)
            rep = report(cm)
            assert rep.accuracy == pytest.approx(
                np.trace(counts) / counts.sum(), rel=1e-15
            )
            for c in range(n):
                assert rep.recall[c] == pytest.approx(
                    counts[c, c] / counts[c].sum(), rel=1e-15
                )
                assert rep.support[c] == counts[c].sum()
            micro_p = np.trace(counts) / counts.sum(axis=0).sum()
            assert micro_p == pytest.approx(rep.accuracy, rel=1e-15)

    def test_as_dict_round_trips_none(self):
        rep = report(ConfusionMatrix(("a", "b"), np.array([[4, 0], [2, 0]])))
        d = rep.as_dict()
        assert d["classes"]["b"]["precision"] is None
        assert d["classes"]["a"]["support"] == 4
        assert d["macro"]["skipped_undefined"]["precision"] == 1
        assert d["accuracy"] == pytest.approx(4 / 6)


class TestRenderReport:
    def test_golden_two_class(self):
        cm = ConfusionMatrix(("cat", "dog"), HAND_COUNTS)
        assert render_report(report(cm), cm) == GOLDEN_RENDER

    def test_deterministic_bytes(self):
        cm = ConfusionMatrix(CLASS_LABELS)
        rng = np.random.default_rng(11)
        for _ in range(200):
            cm.accumulate(int(rng.integers(0, 8)), int(rng.integers(0, 8)))
        first = render_report(report(cm), cm)
        second = render_report(report(cm), cm)
        assert first == second
        assert first.endswith("\n")

    def test_undefined_entries_render_as_na(self):
        cm = ConfusionMatrix(("a", "b"), np.array([[4, 0], [2, 0]]))
        text = render_report(report(cm), cm)
        assert "n/a" in text
        assert "macro averages skip undefined entries: 1 precision, 0 recall, 1 f1" in text
