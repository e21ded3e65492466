import numpy as np
import pytest

from herdwatch.common.errors import EmptyDataError, MalformedInputError
from herdwatch.metrics.classification import (
    ConfusionMatrix,
    average_scores,
    report,
    top_confusions,
)

BEHAVIOUR_F1 = [0.9436, 0.9487, 0.9909, 0.9495, 0.8727, 0.9865, 0.7692, 0.9000, 0.8889]
BEHAVIOUR_SUPPORT = [474, 477, 819, 95, 49, 2280, 14, 19, 65]


def test_average_scores_of_published_table():
    macro, weighted = average_scores(BEHAVIOUR_F1, BEHAVIOUR_SUPPORT)
    assert macro == pytest.approx(0.9167, abs=5e-4)
    assert weighted == pytest.approx(0.9737, abs=5e-4)


def test_average_scores_errors():
    with pytest.raises(EmptyDataError):
        average_scores([], [])
    with pytest.raises(MalformedInputError):
        average_scores([0.5, 0.5], [1])


def test_report():
    cm = ConfusionMatrix(["a", "b", "c"], np.array([[5, 1, 0], [2, 3, 0], [0, 0, 0]]))
    result = report(cm)
    a, b, c = result.per_class

    assert a.precision == pytest.approx(5 / 7)
    assert a.recall == pytest.approx(5 / 6)
    assert a.f1 == pytest.approx(2 * (5 / 7) * (5 / 6) / (5 / 7 + 5 / 6))
    assert b.precision == pytest.approx(3 / 4)
    assert b.recall == pytest.approx(3 / 5)
    assert (a.support, b.support, c.support) == (6, 5, 0)
    assert not a.zero_division and not b.zero_division
    assert c.zero_division
    assert (c.precision, c.recall, c.f1) == (0.0, 0.0, 0.0)
    assert result.accuracy == pytest.approx(8 / 11)

    assert result.macro[0] == pytest.approx((5 / 7 + 3 / 4) / 3)
    assert result.weighted[1] == pytest.approx((6 * 5 / 6 + 5 * 3 / 5) / 11)
    # macro F1 is the mean of per-class F1
    assert result.macro[2] == pytest.approx((a.f1 + b.f1 + c.f1) / 3)


def test_perfect_classifier():
    result = report(ConfusionMatrix(["x", "y"], np.diag([3, 4])))
    assert result.accuracy == 1.0
    assert result.macro == pytest.approx((1.0, 1.0, 1.0))
    assert result.weighted == pytest.approx((1.0, 1.0, 1.0))


def test_top_confusions():
    names = ["standing", "lying", "sleep"]
    counts = np.array([[100, 3, 0], [5, 200, 7], [0, 39, 2241]])
    pairs = top_confusions(ConfusionMatrix(names, counts), 2)

    assert pairs[0][:3] == ("sleep", "lying", 39)
    assert pairs[0][3] == pytest.approx(0.0171, abs=5e-4)
    assert pairs[1][:3] == ("lying", "sleep", 7)


def test_top_confusions_ties_follow_label_order():
    cm = ConfusionMatrix(["a", "b", "c"], np.array([[1, 2, 2], [0, 1, 0], [2, 0, 1]]))
    pairs = top_confusions(cm, 5)
    assert [(t, p) for t, p, _, _ in pairs] == [("a", "b"), ("a", "c"), ("c", "a")]

    with pytest.raises(ValueError):
        top_confusions(cm, 0)


def test_empty_matrix():
    with pytest.raises(EmptyDataError):
        report(ConfusionMatrix(["a", "b"], np.zeros((2, 2), dtype=int)))
    with pytest.raises(EmptyDataError):
        report(ConfusionMatrix([], np.zeros((0, 0), dtype=int)))


@pytest.mark.parametrize(
    "names, counts",
    [
        (["a", "b"], np.zeros((2, 3))),
        (["a", "a"], np.zeros((2, 2))),
        (["a", "b"], np.array([[1, -1], [0, 1]])),
        (["a", "b"], np.array([[1.5, 0], [0, 1]])),
    ],
)
def test_invalid_matrix(names, counts):
    with pytest.raises(MalformedInputError):
        ConfusionMatrix(names, counts)
