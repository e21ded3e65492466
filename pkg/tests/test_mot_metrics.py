import dataclasses
import math

import numpy as np
import pytest

from herdwatch.common.errors import EmptyDataError, MalformedInputError
from herdwatch.common.type_aliases import BoundingBox, TrackRecord, TrackSet
from herdwatch.metrics.mot import (
    MotAccumulatorState,
    accumulate_frame,
    average_summaries,
    evaluate_sequence,
    id_metrics,
    relabel,
    summarize,
)
from herdwatch.settings import MetricSettings


def _box(identity, frame=1):
    # identities live far apart and drift slowly to the right
    return BoundingBox(10.0 + frame, 200.0 * identity, 50.0, 50.0)


def _tracks(num_ids=2, num_frames=100, label=lambda frame, i: i, skip=lambda frame, i: False):
    return TrackSet(
        TrackRecord(frame, label(frame, i), _box(i, frame))
        for frame in range(1, num_frames + 1)
        for i in range(1, num_ids + 1)
        if not skip(frame, i)
    )


def _swap_from(frame_switch):
    return lambda frame, i: (3 - i) if frame >= frame_switch else i


def test_perfect_tracker():
    gt = _tracks()
    summary = evaluate_sequence(gt, _tracks())

    assert summary.mota == 1.0
    assert summary.motp == 0.0
    assert summary.idf1 == 1.0
    assert summary.id_switches == 0
    assert summary.fragmentations == 0
    assert summary.mostly_tracked == 2
    assert summary.num_matches == 200
    assert summary.precision == summary.recall == 1.0


def test_label_swap():
    gt = _tracks()
    pred = _tracks(label=_swap_from(51))
    summary = evaluate_sequence(gt, pred)

    assert summary.id_switches == 2
    assert summary.mota == pytest.approx(1 - 2 / 200)
    assert summary.idtp == 100
    assert summary.idf1 == pytest.approx(0.5)
    assert summary.fragmentations == 0


def test_label_swap_among_eight_identities():
    gt = _tracks(num_ids=8)
    pred = _tracks(
        num_ids=8, label=lambda frame, i: {1: 2, 2: 1}.get(i, i) if frame >= 51 else i
    )
    summary = evaluate_sequence(gt, pred)

    assert summary.id_switches == 2
    assert summary.idf1 == pytest.approx(0.875)


def test_relabel_invariance():
    gt = _tracks(num_ids=3)
    pred = _tracks(num_ids=3, label=lambda frame, i: i if frame < 30 else {1: 2, 2: 1, 3: 3}[i])
    before = evaluate_sequence(gt, pred)
    after = evaluate_sequence(gt, relabel(pred, {1: 11, 2: 12, 3: 13}))
    assert before == after


def test_idp_idr_equal_with_equal_counts():
    gt = _tracks(num_ids=3)
    pred = _tracks(num_ids=3, label=lambda frame, i: i if frame < 70 else {1: 3, 3: 1, 2: 2}[i])
    idf1, idp, idr, idtp, idfp, idfn = id_metrics(gt, pred)
    assert idp == pytest.approx(idr)
    assert idf1 == pytest.approx(idp)
    assert idfp == idfn == len(gt) - idtp


def test_misses_and_fragmentation():
    gt = _tracks(num_ids=1, num_frames=10)
    pred = _tracks(num_ids=1, num_frames=10, skip=lambda frame, i: frame in (4, 5))
    summary = evaluate_sequence(gt, pred)

    assert summary.num_misses == 2
    assert summary.num_false_positives == 0
    assert summary.fragmentations == 1
    assert summary.id_switches == 0
    # 8 of 10 frames tracked is still mostly tracked
    assert summary.mostly_tracked == 1
    assert summary.mota == pytest.approx(0.8)


@pytest.mark.parametrize(
    "tracked_frames, expected",
    [(10, (1, 0, 0)), (5, (0, 1, 0)), (2, (0, 0, 1)), (0, (0, 0, 1))],
)
def test_track_coverage_classes(tracked_frames, expected):
    gt = _tracks(num_ids=1, num_frames=10)
    pred = _tracks(num_ids=1, num_frames=10, skip=lambda frame, i: frame > tracked_frames)
    if tracked_frames == 0:
        pred = TrackSet()
    summary = evaluate_sequence(gt, pred)
    assert (summary.mostly_tracked, summary.partially_tracked, summary.mostly_lost) == expected


def test_gate_rejects_low_overlap():
    gt = TrackSet([TrackRecord(1, 1, BoundingBox(0, 0, 10, 10))])
    pred = TrackSet([TrackRecord(1, 1, BoundingBox(6, 0, 10, 10))])
    summary = evaluate_sequence(gt, pred)

    assert summary.num_matches == 0
    assert summary.num_misses == summary.num_false_positives == 1
    assert summary.mota == -1.0
    assert math.isnan(summary.motp)
    assert summary.idf1 == 0.0


def test_previous_match_is_kept_while_it_passes_the_gate():
    state = MotAccumulatorState()
    accumulate_frame(
        state,
        [TrackRecord(1, 1, BoundingBox(0, 0, 10, 10))],
        [TrackRecord(1, 1, BoundingBox(0, 0, 10, 10))],
    )
    accumulate_frame(
        state,
        [TrackRecord(2, 1, BoundingBox(0, 0, 10, 10))],
        [
            TrackRecord(2, 1, BoundingBox(2, 0, 10, 10)),
            TrackRecord(2, 2, BoundingBox(0, 0, 10, 10)),
        ],
    )
    summary = summarize(state)

    assert summary.id_switches == 0
    assert summary.num_false_positives == 1
    assert summary.motp == pytest.approx(1.0)


def test_one_minus_iou_motp():
    gt = TrackSet([TrackRecord(1, 1, BoundingBox(0, 0, 10, 10))])
    pred = TrackSet([TrackRecord(1, 1, BoundingBox(2, 0, 10, 10))])
    summary = evaluate_sequence(gt, pred, MetricSettings(distance_mode="one-minus-iou"))
    assert summary.motp == pytest.approx(1 - 80 / 120)


def test_empty_ground_truth():
    with pytest.raises(EmptyDataError):
        evaluate_sequence(TrackSet(), _tracks())


def test_mixed_frames_in_one_call():
    with pytest.raises(MalformedInputError):
        accumulate_frame(
            MotAccumulatorState(),
            [TrackRecord(1, 1, _box(1)), TrackRecord(2, 2, _box(2))],
            [],
        )


def test_invalid_settings():
    with pytest.raises(MalformedInputError):
        MetricSettings(iou_gate=0)
    with pytest.raises(MalformedInputError):
        MetricSettings(mt_threshold=0.1, ml_threshold=0.2)


def test_average_summaries():
    gt = _tracks()
    perfect = evaluate_sequence(gt, _tracks())
    swapped = evaluate_sequence(gt, _tracks(label=_swap_from(51)))
    mean = average_summaries([perfect, swapped])
    assert mean["idf1"] == pytest.approx(0.75)
    assert mean["id_switches"] == pytest.approx(1.0)
    with pytest.raises(EmptyDataError):
        average_summaries([])


def test_duplicate_records_rejected():
    with pytest.raises(MalformedInputError):
        TrackSet([TrackRecord(1, 1, _box(1)), TrackRecord(1, 1, _box(2))])


def test_frame_index_is_one_based():
    with pytest.raises(MalformedInputError):
        TrackRecord(0, 1, _box(1))
    assert np.array_equal(_box(1).as_array(), np.array([11.0, 200.0, 50.0, 50.0]))


def test_extra_false_positive_costs_one_over_gt():
    gt = _tracks()
    pred = _tracks()
    pred.add(TrackRecord(10, 99, BoundingBox(1000.0, 1000.0, 50.0, 50.0)))
    summary = evaluate_sequence(gt, pred)

    assert summary.num_false_positives == 1
    assert summary.mota == pytest.approx(1 - 1 / 200)


def test_one_pixel_shift_motp():
    gt = _tracks()
    pred = TrackSet(
        TrackRecord(
            r.frame_index,
            r.identity_id,
            BoundingBox(r.box.x_left + 1, r.box.y_top + 1, r.box.width, r.box.height),
        )
        for f in gt.frames()
        for r in gt.at(f)
    )
    summary = evaluate_sequence(gt, pred)

    assert summary.mota == 1.0
    assert summary.motp == pytest.approx(math.sqrt(2))


def test_record_order_does_not_change_summary():
    gt = _tracks(num_ids=4, skip=lambda frame, i: i == 3 and 30 <= frame < 40)
    pred = _tracks(num_ids=4, label=lambda frame, i: {1: 2, 2: 1}.get(i, i) if frame >= 60 else i)
    rng = np.random.default_rng(3)

    ordered, shuffled = MotAccumulatorState(), MotAccumulatorState()
    for frame in range(1, 101):
        gt_records, pred_records = gt.at(frame), pred.at(frame)
        accumulate_frame(ordered, gt_records, pred_records)
        accumulate_frame(
            shuffled,
            [gt_records[i] for i in rng.permutation(len(gt_records))],
            [pred_records[i] for i in rng.permutation(len(pred_records))],
        )

    expected = dataclasses.asdict(summarize(ordered))
    actual = dataclasses.asdict(summarize(shuffled))
    assert expected["id_switches"] == 2
    assert actual == pytest.approx(expected)
