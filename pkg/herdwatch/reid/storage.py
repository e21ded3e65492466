"""Embedding-bank storage sizing. All results are integer bytes, decimal units only at display."""

from typing import Tuple, Union

from herdwatch.common.enumerations import Precision
from herdwatch.common.errors import MalformedInputError
from herdwatch.settings import StoragePolicy

SECONDS_PER_DAY = 86_400
SECONDS_PER_YEAR = 365 * SECONDS_PER_DAY


def embedding_bytes(dim: int, precision: Union[str, Precision] = Precision.HALF16) -> int:
    """Size of one stored embedding, e.g. 384 x 2 = 768 B at half16"""
    if dim < 1:
        raise MalformedInputError(f"dim must be positive, got {dim}")
    return dim * Precision(precision).nbytes


def entries_per_year(cadence_s: float) -> int:
    """Bank entries written per animal per year at one entry every `cadence_s` seconds"""
    if cadence_s <= 0:
        raise MalformedInputError(f"cadence_s must be positive, got {cadence_s}")
    return int(SECONDS_PER_YEAR // cadence_s)


def annual_footprint(policy: StoragePolicy) -> Tuple[int, int, int]:
    """
    :return: (raw embedding bytes per animal, total bytes per animal, barn total bytes) per year
    """
    entries = policy.cadence_entries_per_year
    raw = entries * policy.bytes_per_embedding
    per_animal = raw + entries * policy.metadata_bytes_per_entry
    return raw, per_animal, policy.animals * per_animal


def raw_traffic_and_reduction(policy: StoragePolicy, cadence_s: float) -> Tuple[int, float]:
    """
    Per-frame embedding traffic against the cadenced bank.

    :return: (raw bytes per animal per day, reduction factor fps x cadence_s)
    """
    if cadence_s <= 0:
        raise MalformedInputError(f"cadence_s must be positive, got {cadence_s}")
    daily = int(round(policy.fps * SECONDS_PER_DAY * policy.bytes_per_embedding))
    return daily, policy.fps * cadence_s
