"""CLEAR-MOT accumulation and identity (IDF1) metrics over paired track sets"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from herdwatch.common.enumerations import DistanceMode
from herdwatch.common.errors import EmptyDataError, MalformedInputError
from herdwatch.common.type_aliases import IdentityId, MotSummary, TrackRecord, TrackSet
from herdwatch.metrics.assignment import solve_min_cost
from herdwatch.metrics.geometry import distance_matrix, iou_matrix
from herdwatch.settings import MetricSettings


@dataclass
class MotAccumulatorState:
    """
    Running CLEAR-MOT state of one sequence. Single writer.

    :param carried_matches: gt -> pred pairs matched in the previous frame
    :param last_match: gt -> pred identity of each gt's most recent match
    :param per_gt_coverage: gt -> [frames present, frames tracked]
    """

    carried_matches: Dict[IdentityId, IdentityId] = field(default_factory=dict)
    last_match: Dict[IdentityId, IdentityId] = field(default_factory=dict)
    false_positives: int = 0
    misses: int = 0
    id_switches: int = 0
    fragmentations: int = 0
    total_gt: int = 0
    total_pred: int = 0
    matched_distance_sum: float = 0.0
    matched_count: int = 0
    per_gt_coverage: Dict[IdentityId, List[int]] = field(default_factory=dict)
    tracked_last: Dict[IdentityId, bool] = field(default_factory=dict)
    ever_tracked: Set[IdentityId] = field(default_factory=set)


def _frame_of(records: Sequence[TrackRecord], role: str) -> Optional[int]:
    frames = {r.frame_index for r in records}
    if len(frames) > 1:
        raise MalformedInputError(f"Mixed frame indices {sorted(frames)} in {role} records")
    return frames.pop() if frames else None


def accumulate_frame(
    state: MotAccumulatorState,
    gt: Sequence[TrackRecord],
    pred: Sequence[TrackRecord],
    iou_gate: float = 0.5,
    distance_mode: Union[str, DistanceMode] = DistanceMode.CENTER,
) -> MotAccumulatorState:
    """
    Add one frame of ground truth and predictions to the accumulator.

    Last frame's pairs are kept while they still pass the IoU gate, the rest are
    matched by a min-cost solve on localisation distance with sub-gate pairs forbidden.

    :param state: accumulator, updated in place
    :param gt: ground-truth records of frame t
    :param pred: predicted records of frame t
    :param iou_gate: minimum IoU for a match
    :param distance_mode: MOTP distance
    :return: the updated state
    """
    gt_frame = _frame_of(gt, "ground-truth")
    pred_frame = _frame_of(pred, "predicted")
    if gt_frame is not None and pred_frame is not None and gt_frame != pred_frame:
        raise MalformedInputError(
            f"Ground truth at frame {gt_frame} paired with predictions at frame {pred_frame}"
        )

    gt_ids = [r.identity_id for r in gt]
    pred_ids = [r.identity_id for r in pred]
    ious = iou_matrix([r.box for r in gt], [r.box for r in pred])
    distances = distance_matrix([r.box for r in gt], [r.box for r in pred], distance_mode)

    matches: Dict[int, int] = {}
    pred_index = {p: j for j, p in enumerate(pred_ids)}
    for i, g in enumerate(gt_ids):
        p = state.carried_matches.get(g)
        j = pred_index.get(p) if p is not None else None
        if j is not None and j not in matches.values() and ious[i, j] >= iou_gate:
            matches[i] = j

    free_gt = [i for i in range(len(gt_ids)) if i not in matches]
    used_pred = set(matches.values())
    free_pred = [j for j in range(len(pred_ids)) if j not in used_pred]
    if free_gt and free_pred:
        sub_iou = ious[np.ix_(free_gt, free_pred)]
        costs = np.where(
            sub_iou >= iou_gate, distances[np.ix_(free_gt, free_pred)], np.inf
        )
        pairs, _ = solve_min_cost(costs)
        for r, c in pairs:
            matches[free_gt[r]] = free_pred[c]

    state.total_gt += len(gt_ids)
    state.total_pred += len(pred_ids)
    state.misses += len(gt_ids) - len(matches)
    state.false_positives += len(pred_ids) - len(matches)

    carried = {}
    for i, g in enumerate(gt_ids):
        coverage = state.per_gt_coverage.setdefault(g, [0, 0])
        coverage[0] += 1
        tracked = i in matches
        if tracked:
            j = matches[i]
            p = pred_ids[j]
            coverage[1] += 1
            if g in state.last_match and state.last_match[g] != p:
                state.id_switches += 1
            if g in state.ever_tracked and not state.tracked_last.get(g, False):
                state.fragmentations += 1
            state.last_match[g] = p
            state.ever_tracked.add(g)
            state.matched_distance_sum += float(distances[i, j])
            state.matched_count += 1
            carried[g] = p
        state.tracked_last[g] = tracked
    state.carried_matches = carried

    return state


def summarize(
    state: MotAccumulatorState, mt_threshold: float = 0.8, ml_threshold: float = 0.2
) -> MotSummary:
    """
    CLEAR-MOT summary of an accumulator. Identity fields are left at zero,
    see `evaluate_sequence` for the merged summary.

    :param state: filled accumulator
    :param mt_threshold: tracked fraction for mostly tracked
    :param ml_threshold: tracked fraction for mostly lost
    """
    if state.total_gt == 0:
        raise EmptyDataError("Cannot summarise a sequence without ground truth")

    mota = 1.0 - (state.misses + state.false_positives + state.id_switches) / state.total_gt
    motp = (
        state.matched_distance_sum / state.matched_count
        if state.matched_count > 0
        else math.nan
    )
    mostly_tracked = partially_tracked = mostly_lost = 0
    for present, tracked in state.per_gt_coverage.values():
        ratio = tracked / present
        if ratio >= mt_threshold:
            mostly_tracked += 1
        elif ratio <= ml_threshold:
            mostly_lost += 1
        else:
            partially_tracked += 1

    detections = state.matched_count + state.false_positives
    return MotSummary(
        mota=mota,
        motp=motp,
        idf1=0.0,
        idp=0.0,
        idr=0.0,
        precision=state.matched_count / detections if detections else 0.0,
        recall=state.matched_count / state.total_gt,
        mostly_tracked=mostly_tracked,
        partially_tracked=partially_tracked,
        mostly_lost=mostly_lost,
        id_switches=state.id_switches,
        fragmentations=state.fragmentations,
        num_false_positives=state.false_positives,
        num_misses=state.misses,
        num_matches=state.matched_count,
        num_objects=state.total_gt,
        num_predictions=state.total_pred,
    )


def id_metrics(
    gt: TrackSet, pred: TrackSet, iou_gate: float = 0.5
) -> Tuple[float, float, float, int, int, int]:
    """
    Identity metrics from one global trajectory-to-trajectory assignment.

    The assignment is solved on a square matrix padded with one dummy column per
    ground-truth identity and one dummy row per predicted identity, so pairing costs
    count the frames that are not jointly covered under the IoU gate and leaving a
    trajectory unassigned costs its full length.

    :return: (idf1, idp, idr, idtp, idfp, idfn)
    """
    gt_ids = gt.identities()
    pred_ids = pred.identities()
    g_index = {g: i for i, g in enumerate(gt_ids)}
    p_index = {p: j for j, p in enumerate(pred_ids)}
    n_gt, n_pred = len(gt_ids), len(pred_ids)

    gt_len = np.zeros(n_gt)
    pred_len = np.zeros(n_pred)
    overlap = np.zeros((n_gt, n_pred))
    for frame in sorted(set(gt.frames()) | set(pred.frames())):
        gt_records = gt.at(frame)
        pred_records = pred.at(frame)
        for r in gt_records:
            gt_len[g_index[r.identity_id]] += 1
        for r in pred_records:
            pred_len[p_index[r.identity_id]] += 1
        if not gt_records or not pred_records:
            continue
        gated = iou_matrix([r.box for r in gt_records], [r.box for r in pred_records]) >= iou_gate
        for i, j in zip(*np.nonzero(gated)):
            overlap[g_index[gt_records[i].identity_id], p_index[pred_records[j].identity_id]] += 1

    size = n_gt + n_pred
    costs = np.full((size, size), np.inf)
    costs[:n_gt, :n_pred] = gt_len[:, None] + pred_len[None, :] - 2 * overlap
    costs[np.arange(n_gt), n_pred + np.arange(n_gt)] = gt_len
    costs[n_gt + np.arange(n_pred), np.arange(n_pred)] = pred_len
    costs[n_gt:, n_pred:] = 0

    pairs, _ = solve_min_cost(costs)
    idtp = int(sum(overlap[i, j] for i, j in pairs if i < n_gt and j < n_pred))
    total_gt = int(gt_len.sum())
    total_pred = int(pred_len.sum())
    idfp = total_pred - idtp
    idfn = total_gt - idtp

    denominator = 2 * idtp + idfp + idfn
    idf1 = 2 * idtp / denominator if denominator else 0.0
    idp = idtp / total_pred if total_pred else 0.0
    idr = idtp / total_gt if total_gt else 0.0
    return idf1, idp, idr, idtp, idfp, idfn


def evaluate_sequence(
    gt: TrackSet, pred: TrackSet, settings: MetricSettings = MetricSettings()
) -> MotSummary:
    """
    Evaluate one clip: CLEAR-MOT accumulation over every frame merged with IDF1.

    :param gt: ground-truth track set
    :param pred: predicted track set
    :param settings: gate, distance mode and MT/ML thresholds
    """
    if len(gt) == 0:
        raise EmptyDataError("Ground truth track set is empty")

    state = MotAccumulatorState()
    for frame in sorted(set(gt.frames()) | set(pred.frames())):
        accumulate_frame(
            state, gt.at(frame), pred.at(frame), settings.iou_gate, settings.distance_mode
        )
    summary = summarize(state, settings.mt_threshold, settings.ml_threshold)
    idf1, idp, idr, idtp, idfp, idfn = id_metrics(gt, pred, settings.iou_gate)
    return dataclasses.replace(
        summary, idf1=idf1, idp=idp, idr=idr, idtp=idtp, idfp=idfp, idfn=idfn
    )


def average_summaries(summaries: Sequence[MotSummary]) -> Dict[str, float]:
    """Arithmetic mean over clips of every summary field"""
    if not summaries:
        raise EmptyDataError("No summaries to average")
    return {
        f.name: float(np.mean([getattr(s, f.name) for s in summaries]))
        for f in dataclasses.fields(MotSummary)
    }


def relabel(track_set: TrackSet, mapping: Mapping[IdentityId, IdentityId]) -> TrackSet:
    """Apply an identity relabelling to every record; unmapped identities are kept"""
    return TrackSet(r.relabel(mapping.get(r.identity_id, r.identity_id)) for r in track_set)
