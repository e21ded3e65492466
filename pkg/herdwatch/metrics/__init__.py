from herdwatch.metrics.assignment import brute_force_min_cost, solve_min_cost
from herdwatch.metrics.classification import (
    ClassReport,
    ClassScores,
    ConfusionMatrix,
    average_scores,
    report,
    top_confusions,
)
from herdwatch.metrics.geometry import (
    box_distance,
    center_distance,
    distance_matrix,
    iou,
    iou_matrix,
)
from herdwatch.metrics.mot import (
    MotAccumulatorState,
    accumulate_frame,
    average_summaries,
    evaluate_sequence,
    id_metrics,
    relabel,
    summarize,
)

__all__ = [
    "solve_min_cost",
    "brute_force_min_cost",
    "ConfusionMatrix",
    "ClassScores",
    "ClassReport",
    "report",
    "average_scores",
    "top_confusions",
    "iou",
    "iou_matrix",
    "center_distance",
    "box_distance",
    "distance_matrix",
    "MotAccumulatorState",
    "accumulate_frame",
    "summarize",
    "id_metrics",
    "evaluate_sequence",
    "average_summaries",
    "relabel",
]
