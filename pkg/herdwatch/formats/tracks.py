"""Track files: CSV with header `frame,id,x,y,w,h,score`, sorted by frame then id"""

import csv
from typing import Tuple

from herdwatch.common.errors import MalformedInputError
from herdwatch.common.type_aliases import BoundingBox, TrackRecord, TrackSet

HEADER = ("frame", "id", "x", "y", "w", "h", "score")


def parse_record(row: list, line: int) -> TrackRecord:
    if len(row) != len(HEADER):
        raise MalformedInputError(
            f"line {line}: expected {len(HEADER)} fields, got {len(row)}"
        )
    try:
        frame, identity = int(row[0]), int(row[1])
        x, y, w, h, score = (float(v) for v in row[2:])
        return TrackRecord(frame, identity, BoundingBox(x, y, w, h), score)
    except ValueError as e:
        raise MalformedInputError(f"line {line}: {e}") from e


def load_tracks(path: str) -> TrackSet:
    """
    Read a track file. Rows out of (frame, id) order or repeating a (frame, id) pair
    raise MalformedInputError with the line number.
    """
    track_set = TrackSet()
    previous: Tuple[int, int] = (0, 0)
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != HEADER:
            raise MalformedInputError(f"line 1: expected header {','.join(HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not v.strip() for v in row):
                continue
            record = parse_record(row, line)
            key = (record.frame_index, record.identity_id)
            if key == previous:
                raise MalformedInputError(
                    f"line {line}: duplicate record for frame {key[0]}, id {key[1]}"
                )
            if key < previous:
                raise MalformedInputError(f"line {line}: records are not sorted by frame then id")
            previous = key
            track_set.add(record)
    return track_set


def save_tracks(track_set: TrackSet, path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HEADER)
        for r in track_set:
            writer.writerow(
                [
                    r.frame_index,
                    r.identity_id,
                    repr(r.box.x_left),
                    repr(r.box.y_top),
                    repr(r.box.width),
                    repr(r.box.height),
                    repr(r.confidence),
                ]
            )
