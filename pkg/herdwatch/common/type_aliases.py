import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np
import torch as T

from herdwatch.common.errors import MalformedInputError

Tensor = Union[np.ndarray, T.Tensor]
IdentityId = int
Pairs = List[Tuple[int, int]]


@dataclass(frozen=True)
class BoundingBox:
    """
    Axis-aligned box in top-left + width/height form, in pixels

    :param x_left: left edge
    :param y_top: top edge
    :param width: box width, strictly positive
    :param height: box height, strictly positive
    """

    x_left: float
    y_top: float
    width: float
    height: float

    def __post_init__(self) -> None:
        values = (self.x_left, self.y_top, self.width, self.height)
        if not all(math.isfinite(v) for v in values):
            raise MalformedInputError(f"Box coordinates must be finite, got {values}")
        if self.x_left < 0 or self.y_top < 0:
            raise MalformedInputError(
                f"Box origin must be non-negative, got ({self.x_left}, {self.y_top})"
            )
        if self.width <= 0 or self.height <= 0:
            raise MalformedInputError(
                f"Box width and height must be positive, got ({self.width}, {self.height})"
            )

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Tuple[float, float]:
        return self.x_left + self.width / 2, self.y_top + self.height / 2

    def translate(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x_left + dx, self.y_top + dy, self.width, self.height)

    def as_array(self) -> np.ndarray:
        return np.array([self.x_left, self.y_top, self.width, self.height])


@dataclass(frozen=True)
class TrackRecord:
    """
    One box of one identity in one frame

    :param frame_index: 1-based frame number
    :param identity_id: track identity label
    :param box: the bounding box
    :param confidence: detection score, carried but never used for filtering
    """

    frame_index: int
    identity_id: IdentityId
    box: BoundingBox
    confidence: float = 1.0

    def __post_init__(self) -> None:
        if self.frame_index < 1:
            raise MalformedInputError(
                f"Frame indices are 1-based, got {self.frame_index}"
            )

    def relabel(self, identity_id: IdentityId) -> "TrackRecord":
        return TrackRecord(self.frame_index, identity_id, self.box, self.confidence)


class TrackSet:
    """
    Per-frame, per-identity collection of track records (ground truth or predictions).
    At most one record is allowed per (frame, identity) pair.

    :param records: the records, in any order
    """

    def __init__(self, records: Iterable[TrackRecord] = ()) -> None:
        self._by_frame: Dict[int, Dict[IdentityId, TrackRecord]] = defaultdict(dict)
        self._count = 0
        for record in records:
            self.add(record)

    def add(self, record: TrackRecord) -> None:
        frame = self._by_frame[record.frame_index]
        if record.identity_id in frame:
            raise MalformedInputError(
                f"Duplicate record for frame {record.frame_index}, id {record.identity_id}"
            )
        frame[record.identity_id] = record
        self._count += 1

    def __len__(self) -> int:
        return self._count

    def __iter__(self) -> Iterator[TrackRecord]:
        for frame_index in self.frames():
            frame = self._by_frame[frame_index]
            for identity_id in sorted(frame):
                yield frame[identity_id]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrackSet):
            return NotImplemented
        return list(self) == list(other)

    def frames(self) -> List[int]:
        return sorted(f for f, records in self._by_frame.items() if records)

    @property
    def frame_range(self) -> Optional[Tuple[int, int]]:
        frames = self.frames()
        if not frames:
            return None
        return frames[0], frames[-1]

    def at(self, frame_index: int) -> List[TrackRecord]:
        """Records of one frame, sorted by identity"""
        frame = self._by_frame.get(frame_index, {})
        return [frame[i] for i in sorted(frame)]

    def identities(self) -> List[IdentityId]:
        return sorted({r.identity_id for r in self})

    def get(self, frame_index: int, identity_id: IdentityId) -> Optional[TrackRecord]:
        return self._by_frame.get(frame_index, {}).get(identity_id)


@dataclass
class MotSummary:
    """
    CLEAR-MOT and identity metrics of one sequence

    :param mota: multi-object tracking accuracy, at most 1
    :param motp: mean localisation distance over matches
    :param idf1: identity F1
    :param idp: identity precision
    :param idr: identity recall
    :param precision: detection-level precision, TP / (TP + FP)
    :param recall: detection-level recall, TP / GT
    """

    mota: float
    motp: float
    idf1: float
    idp: float
    idr: float
    precision: float
    recall: float
    mostly_tracked: int
    partially_tracked: int
    mostly_lost: int
    id_switches: int
    fragmentations: int
    num_false_positives: int = 0
    num_misses: int = 0
    num_matches: int = 0
    num_objects: int = 0
    num_predictions: int = 0
    idtp: int = 0
    idfp: int = 0
    idfn: int = 0


@dataclass
class LossBreakdown:
    """Unweighted terms of the distillation objective and their weighted total"""

    directional: float
    cosine: float
    moment: float
    raw: float
    total: float


@dataclass
class FidelityReport:
    """
    Student-versus-teacher feature diagnostics

    :param cosine_mean: mean per-location cosine similarity of channel vectors
    :param cosine_std: population std of the per-location cosines
    :param scale_ratio: whole-tensor std of student over std of teacher
    :param mse: plain mean-squared error
    :param channel_mean_abs_diff: mean |mu_s - mu_t| over (batch, channel)
    :param channel_std_abs_diff: mean |sigma_s - sigma_t| over (batch, channel)
    """

    cosine_mean: float
    cosine_std: float
    scale_ratio: float
    mse: float
    channel_mean_abs_diff: float = 0.0
    channel_std_abs_diff: float = 0.0


@dataclass(frozen=True)
class ReidEvent:
    """A logged identity swap: the claimed track was reassigned to corrected_id"""

    frame: int
    claimed_id: IdentityId
    corrected_id: IdentityId
    sim_self: float
    sim_other: float


@dataclass(frozen=True)
class ReinitDirective:
    """Instruction for the tracker to re-prompt corrected_id on the current box"""

    frame: int
    claimed_id: IdentityId
    corrected_id: IdentityId
    box: Optional[BoundingBox] = None


@dataclass
class HarnessReport:
    """Outcome of one re-identification run over a synthetic scenario"""

    idsw_before: int
    idsw_after: int
    false_reinit_count: int
    corrected_switch_count: int
    mot_before: MotSummary
    mot_after: MotSummary
    events: List[ReidEvent] = field(default_factory=list)
