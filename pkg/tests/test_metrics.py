import numpy as np
import pytest

from msdkmeans import (
    ConfusionCounts,
    Dataset,
    LengthMismatch,
    MsdParams,
    compare,
    evaluate,
    msd_detect,
    render_table,
)
from msdkmeans.core import make_report
from msdkmeans.metrics import ZERO_DENOMINATOR, summarize_counts


def report_for(pred):
    pred = np.asarray(pred, bool)
    data = Dataset.from_values(np.zeros(len(pred)))
    return make_report("fixed", data, pred.astype(int), np.zeros(len(pred)), np.zeros(len(pred)), {})


def test_perfect_detector():
    truth = [0, 1, 0, 0, 1, 1, 0]
    m = evaluate(report_for(truth), truth)
    assert (m.tpr, m.fpr, m.precision, m.accuracy, m.recall, m.f_measure) == (1, 0, 1, 1, 1, 1)
    assert m.undefined == {}


def test_flag_everything():
    truth = np.array([0] * 7 + [1] * 3, bool)
    m = evaluate(report_for(np.ones(10)), truth)
    assert m.tpr == 1
    assert m.precision == pytest.approx(0.3)


def test_all_normal_labels_are_undefined_not_zero():
    m = evaluate(report_for([0, 0, 1]), [0, 0, 0])
    assert m.tpr is None and m.recall is None and m.f_measure is None
    assert m.undefined["tpr"] == ZERO_DENOMINATOR
    assert m.fpr == pytest.approx(1 / 3)


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        evaluate(report_for([0, 1]), [0, 1, 1])


def test_compare_orders():
    a = summarize_counts(ConfusionCounts(tp=985, fp=14, tn=100, fn=15))
    b = summarize_counts(ConfusionCounts(tp=30, fp=85, tn=20, fn=1))
    ranked = compare([("LOF", b), ("MSD-Kmeans", a)])
    assert [n for n, _ in ranked] == ["MSD-Kmeans", "LOF"]
    assert compare([("only", a)]) == [("only", a)]


def test_compare_tie_breaks_on_precision():
    # equal F (2/3) with different precision
    hi_p = summarize_counts(ConfusionCounts(tp=1, fp=0, tn=5, fn=1))
    lo_p = summarize_counts(ConfusionCounts(tp=2, fp=2, tn=5, fn=0))
    assert hi_p.f_measure == pytest.approx(lo_p.f_measure)
    ranked = compare([("low", lo_p), ("high", hi_p)])
    assert [n for n, _ in ranked] == ["high", "low"]


def test_table_has_expected_columns():
    m = evaluate(msd_detect(Dataset.from_values([1, 2, 3, 4, 5]), MsdParams()), [1, 0, 0, 0, 1])
    text = render_table([("msd", m)])
    for col in ("TPR (%)", "FPR (%)", "Precision (%)", "Accuracy (%)", "Recall (%)",
                "F-measure (%)", "Execution Time (ms)"):
        assert col in text
    assert "100.0" in text


def test_evaluate_is_pure():
    r = report_for([1, 0, 1, 0])
    assert evaluate(r, [1, 1, 0, 0]) == evaluate(r, [1, 1, 0, 0])
