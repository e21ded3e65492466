"""Bounding-box primitives and pairwise distances"""

import math
from typing import Sequence, Tuple, Union

import numpy as np

from herdwatch.common.enumerations import DistanceMode
from herdwatch.common.type_aliases import BoundingBox


def to_corners(box: BoundingBox) -> Tuple[float, float, float, float]:
    """(x1, y1, x2, y2) corner form"""
    return box.x_left, box.y_top, box.x_left + box.width, box.y_top + box.height


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """
    Intersection over union of two boxes

    :return: value in [0, 1], 0 for disjoint boxes
    """
    ax1, ay1, ax2, ay2 = to_corners(a)
    bx1, by1, bx2, by2 = to_corners(b)
    inter_w = max(0.0, min(ax2, bx2) - max(ax1, bx1))
    inter_h = max(0.0, min(ay2, by2) - max(ay1, by1))
    intersection = inter_w * inter_h
    if intersection == 0:
        return 0.0
    union = a.area + b.area - intersection
    return min(1.0, intersection / union)


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centres, in pixels"""
    (acx, acy), (bcx, bcy) = a.center, b.center
    return math.hypot(acx - bcx, acy - bcy)


def box_distance(
    a: BoundingBox, b: BoundingBox, mode: Union[str, DistanceMode] = DistanceMode.CENTER
) -> float:
    mode = DistanceMode(mode)
    if mode == DistanceMode.CENTER:
        return center_distance(a, b)
    return 1.0 - iou(a, b)


def _as_array(boxes: Union[Sequence[BoundingBox], np.ndarray]) -> np.ndarray:
    if isinstance(boxes, np.ndarray):
        return boxes.reshape(-1, 4).astype(np.float64)
    return np.array([b.as_array() for b in boxes], dtype=np.float64).reshape(-1, 4)


def iou_matrix(
    a_boxes: Union[Sequence[BoundingBox], np.ndarray],
    b_boxes: Union[Sequence[BoundingBox], np.ndarray],
) -> np.ndarray:
    """
    Pairwise IoU between two box lists

    :param a_boxes: n boxes, or an (n, 4) array of (x, y, w, h)
    :param b_boxes: m boxes, or an (m, 4) array of (x, y, w, h)
    :return: (n, m) IoU matrix
    """
    a = _as_array(a_boxes)[:, None, :]
    b = _as_array(b_boxes)[None, :, :]
    inter_w = np.clip(
        np.minimum(a[..., 0] + a[..., 2], b[..., 0] + b[..., 2])
        - np.maximum(a[..., 0], b[..., 0]),
        0,
        None,
    )
    inter_h = np.clip(
        np.minimum(a[..., 1] + a[..., 3], b[..., 1] + b[..., 3])
        - np.maximum(a[..., 1], b[..., 1]),
        0,
        None,
    )
    intersection = inter_w * inter_h
    union = a[..., 2] * a[..., 3] + b[..., 2] * b[..., 3] - intersection
    return np.clip(intersection / union, 0.0, 1.0)


def distance_matrix(
    a_boxes: Union[Sequence[BoundingBox], np.ndarray],
    b_boxes: Union[Sequence[BoundingBox], np.ndarray],
    mode: Union[str, DistanceMode] = DistanceMode.CENTER,
) -> np.ndarray:
    """Pairwise localisation distance, centre distance in pixels or 1 - IoU"""
    mode = DistanceMode(mode)
    if mode == DistanceMode.ONE_MINUS_IOU:
        return 1.0 - iou_matrix(a_boxes, b_boxes)
    a = _as_array(a_boxes)
    b = _as_array(b_boxes)
    a_centers = a[:, :2] + a[:, 2:] / 2
    b_centers = b[:, :2] + b[:, 2:] / 2
    diff = a_centers[:, None, :] - b_centers[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])
