"""Per-identity embedding banks and their JSON persistence"""

import base64
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np

from herdwatch.common.enumerations import Precision
from herdwatch.common.errors import EmptyDataError, MalformedInputError
from herdwatch.common.type_aliases import IdentityId

HISTOGRAM_TOLERANCE = 1e-9


@dataclass
class EmbeddingVector:
    """
    Appearance embedding. Values are held as float64, `precision` is the storage precision.

    :param values: 1-D finite vector
    :param precision: half16 or single32
    """

    values: np.ndarray
    precision: Precision = Precision.HALF16

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.precision = Precision(self.precision)
        if self.values.ndim != 1 or self.values.size == 0:
            raise MalformedInputError(
                f"Embeddings must be non-empty 1-D vectors, got shape {self.values.shape}"
            )
        if not np.isfinite(self.values).all():
            raise MalformedInputError("Embedding contains non-finite values")

    @property
    def dim(self) -> int:
        return self.values.size

    @property
    def nbytes(self) -> int:
        return self.dim * self.precision.nbytes

    def encode(self) -> str:
        """Base64 of the little-endian payload at the storage precision"""
        return base64.b64encode(
            self.values.astype(self.precision.numpy_dtype).tobytes()
        ).decode("ascii")

    @classmethod
    def decode(cls, payload: str, precision: Union[str, Precision]) -> "EmbeddingVector":
        precision = Precision(precision)
        try:
            raw = base64.b64decode(payload, validate=True)
        except ValueError as e:
            raise MalformedInputError(f"Invalid embedding payload: {e}") from e
        if len(raw) % precision.nbytes:
            raise MalformedInputError(
                f"Payload of {len(raw)} bytes is not a whole number of {precision.value} values"
            )
        values = np.frombuffer(raw, dtype=precision.numpy_dtype).astype(np.float64)
        return cls(values, precision)


@dataclass
class BankEntry:
    """
    :param timestamp: seconds
    :param embedding: the (EMA-summarised) embedding
    :param behaviour_histogram: non-negative behaviour frequencies summing to 1
    """

    timestamp: float
    embedding: EmbeddingVector
    behaviour_histogram: np.ndarray

    def __post_init__(self) -> None:
        self.behaviour_histogram = np.asarray(self.behaviour_histogram, dtype=np.float64)
        histogram = self.behaviour_histogram
        if histogram.ndim != 1 or histogram.size == 0 or (histogram < 0).any():
            raise MalformedInputError("Behaviour histogram must be a non-negative 1-D vector")
        if abs(histogram.sum() - 1.0) > HISTOGRAM_TOLERANCE:
            raise MalformedInputError(
                f"Behaviour histogram must sum to 1, got {histogram.sum()}"
            )


def uniform_histogram(num_behaviours: int) -> np.ndarray:
    return np.full(num_behaviours, 1.0 / num_behaviours)


@dataclass
class EmbeddingBank:
    """
    Time-ordered embedding history of one identity

    :param identity_id: the identity
    :param entries: entries with strictly increasing timestamps
    :param last_update: timestamp of the most recent append
    """

    identity_id: IdentityId
    entries: List[BankEntry] = field(default_factory=list)
    last_update: Optional[float] = None

    def __post_init__(self) -> None:
        entries, self.entries = self.entries, []
        last_update = self.last_update
        for entry in entries:
            self.append(entry)
        if last_update is not None:
            self.last_update = last_update

    def __len__(self) -> int:
        return len(self.entries)

    def append(self, entry: BankEntry) -> None:
        if self.entries:
            if entry.timestamp <= self.entries[-1].timestamp:
                raise MalformedInputError(
                    f"Bank {self.identity_id}: timestamp {entry.timestamp} does not follow "
                    f"{self.entries[-1].timestamp}"
                )
            if entry.embedding.dim != self.dim:
                raise MalformedInputError(
                    f"Bank {self.identity_id}: embedding dim {entry.embedding.dim} != {self.dim}"
                )
        self.entries.append(entry)
        self.last_update = entry.timestamp

    @property
    def dim(self) -> int:
        return self.latest.embedding.dim

    @property
    def latest(self) -> BankEntry:
        if not self.entries:
            raise EmptyDataError(f"Bank {self.identity_id} is empty")
        return self.entries[-1]

    def matrix(self) -> np.ndarray:
        """(entries, dim) array of the bank's embeddings"""
        if not self.entries:
            raise EmptyDataError(f"Bank {self.identity_id} is empty")
        return np.stack([e.embedding.values for e in self.entries])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "identity_id": self.identity_id,
            "last_update": self.last_update,
            "entries": [
                {
                    "timestamp": e.timestamp,
                    "precision": e.embedding.precision.value,
                    "dim": e.embedding.dim,
                    "embedding": e.embedding.encode(),
                    "behaviour_histogram": e.behaviour_histogram.tolist(),
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EmbeddingBank":
        try:
            entries = []
            for item in data["entries"]:
                embedding = EmbeddingVector.decode(item["embedding"], item["precision"])
                if embedding.dim != item["dim"]:
                    raise MalformedInputError(
                        f"Declared dim {item['dim']} but payload holds {embedding.dim} values"
                    )
                entries.append(
                    BankEntry(item["timestamp"], embedding, item["behaviour_histogram"])
                )
            return cls(int(data["identity_id"]), entries, data.get("last_update"))
        except (KeyError, TypeError) as e:
            raise MalformedInputError(f"Invalid bank document: {e}") from e


def save_banks(banks: Mapping[IdentityId, EmbeddingBank], directory: str) -> List[str]:
    """Write one `bank_<id>.json` document per identity, return the paths"""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for identity_id in sorted(banks):
        path = os.path.join(directory, f"bank_{identity_id}.json")
        with open(path, "w") as f:
            json.dump(banks[identity_id].to_dict(), f)
        paths.append(path)
    return paths


def load_banks(directory: str) -> Dict[IdentityId, EmbeddingBank]:
    banks = {}
    for name in sorted(os.listdir(directory)):
        if not (name.startswith("bank_") and name.endswith(".json")):
            continue
        with open(os.path.join(directory, name)) as f:
            try:
                bank = EmbeddingBank.from_dict(json.load(f))
            except json.JSONDecodeError as e:
                raise MalformedInputError(f"{name}: {e}") from e
        banks[bank.identity_id] = bank
    return banks
