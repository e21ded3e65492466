"""This module holds settings objects to configure the other modules"""

import itertools
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from herdwatch.common.enumerations import DistanceMode
from herdwatch.common.errors import MalformedInputError


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class Settings:
    """Base class for settings objects"""

    def filter_none(self) -> Dict[str, Any]:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready dictionary with enums replaced by their values"""
        return _plain(asdict(self))


@dataclass
class LoggerSettings(Settings):
    """
    Settings for the Logger

    :param log_path: optional path of a plain-text log file
    :param tensorboard_log_path: path to store the tensorboard log
    :param file_handler_level: logging level for the file log
    :param stream_handler_level: logging level for the streaming log
    :param verbose: whether to record any logs at all
    """

    log_path: Optional[str] = None
    tensorboard_log_path: Optional[str] = None
    file_handler_level: int = logging.DEBUG
    stream_handler_level: int = logging.INFO
    verbose: bool = True


@dataclass
class MetricSettings(Settings):
    """
    Settings for CLEAR-MOT and identity metric evaluation

    :param iou_gate: minimum IoU for a ground-truth/prediction pair to be matchable
    :param distance_mode: "center" (pixels) or "one-minus-iou" localisation distance
    :param mt_threshold: tracked fraction at or above which an identity is mostly tracked
    :param ml_threshold: tracked fraction at or below which an identity is mostly lost
    """

    iou_gate: float = 0.5
    distance_mode: Union[str, DistanceMode] = DistanceMode.CENTER
    mt_threshold: float = 0.8
    ml_threshold: float = 0.2

    def __post_init__(self) -> None:
        self.distance_mode = DistanceMode(self.distance_mode)
        if not 0 < self.iou_gate <= 1:
            raise MalformedInputError(f"iou_gate must be in (0, 1], got {self.iou_gate}")
        if not 0 <= self.ml_threshold <= self.mt_threshold <= 1:
            raise MalformedInputError(
                "Thresholds must satisfy 0 <= ml_threshold <= mt_threshold <= 1, "
                f"got ml={self.ml_threshold}, mt={self.mt_threshold}"
            )


@dataclass
class LossWeights(Settings):
    """
    Weights of the four distillation loss terms

    :param w_dir: directional (normalised MSE) weight
    :param w_cos: patch-wise cosine weight
    :param w_moment: per-channel moment matching weight
    :param w_raw: raw MSE weight
    """

    w_dir: float = 1.0
    w_cos: float = 0.5
    w_moment: float = 0.3
    w_raw: float = 0.1

    def __post_init__(self) -> None:
        weights = (self.w_dir, self.w_cos, self.w_moment, self.w_raw)
        if any(w < 0 for w in weights):
            raise MalformedInputError(f"Loss weights must be non-negative, got {weights}")

    @classmethod
    def parse(cls, text: str) -> "LossWeights":
        """Parse a comma separated `dir,cos,moment,raw` string"""
        try:
            values = [float(v) for v in text.split(",")]
        except ValueError as e:
            raise MalformedInputError(f"Invalid weights '{text}'") from e
        if len(values) != 4:
            raise MalformedInputError(f"Expected 4 weights, got {len(values)}")
        return cls(*values)


@dataclass
class LossSettings(Settings):
    """
    :param eps: when set, norms are clamped to at least eps instead of raising on zero norms
    """

    eps: Optional[float] = None


@dataclass
class PruneSettings(Settings):
    """
    Settings for the sliding-window session pruning

    :param keep_last: number of recent non-conditioning outputs kept per object
    :param interval: prune every `interval` processed frames
    :param enabled: whether pruning runs at all
    """

    keep_last: int = 8
    interval: int = 25
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.keep_last < 0 or self.interval < 1:
            raise MalformedInputError(
                f"keep_last must be >= 0 and interval >= 1, got {self.keep_last}, {self.interval}"
            )


@dataclass
class MemoryModelParams(Settings):
    """
    Linear session-memory growth model. Sizes are decimal (1 MB = 1e6 B, 1 GB = 1e9 B).

    :param per_frame_per_object_mb: growth constant k per frame per object
    :param base_mb: fixed session footprint independent of objects
    :param num_objects: number of tracked objects
    :param fps: stream frame rate
    :param budget_gb: device memory envelope
    :param cond_frame_mb: size of each object's conditioning-frame output
    """

    per_frame_per_object_mb: float = 5.6
    base_mb: float = 0.0
    num_objects: int = 8
    fps: float = 30.0
    budget_gb: float = 16.0
    cond_frame_mb: float = 0.0

    def __post_init__(self) -> None:
        if (
            self.per_frame_per_object_mb <= 0
            or self.num_objects < 1
            or self.fps <= 0
            or self.budget_gb <= 0
        ):
            raise MalformedInputError(
                "per_frame_per_object_mb, num_objects, fps and budget_gb must be positive"
            )
        if self.base_mb < 0 or self.cond_frame_mb < 0:
            raise MalformedInputError("base_mb and cond_frame_mb must be non-negative")

    @property
    def entry_bytes(self) -> int:
        return int(round(self.per_frame_per_object_mb * 1e6))

    @property
    def base_bytes(self) -> int:
        return int(round(self.base_mb * 1e6))

    @property
    def cond_bytes(self) -> int:
        return int(round(self.cond_frame_mb * 1e6))

    @property
    def budget_bytes(self) -> int:
        return int(round(self.budget_gb * 1e9))


@dataclass
class ReidConfig(Settings):
    """
    Settings for the embedding-pool re-identification loop

    :param tau_low: self-similarity below which the claimed identity is doubted
    :param tau_high: other-identity similarity above which the track is reassigned,
        values above 1 can never be reached and disable reassignment
    :param alpha: EMA weight of the current observation in a new bank entry
    :param cadence_s: seconds between bank updates
    """

    tau_low: float = 0.65
    tau_high: float = 0.78
    alpha: float = 0.7
    cadence_s: float = 3600.0

    def __post_init__(self) -> None:
        if not 0 < self.tau_low < self.tau_high:
            raise MalformedInputError(
                f"Thresholds must satisfy 0 < tau_low < tau_high, got {self.tau_low}, {self.tau_high}"
            )
        if not 0 < self.alpha <= 1:
            raise MalformedInputError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.cadence_s <= 0:
            raise MalformedInputError(f"cadence_s must be positive, got {self.cadence_s}")

    @property
    def correction_enabled(self) -> bool:
        return self.tau_high <= 1


@dataclass
class StoragePolicy(Settings):
    """
    Embedding-bank storage policy

    :param cadence_entries_per_year: bank entries written per animal per year
    :param bytes_per_embedding: size of one stored embedding
    :param metadata_bytes_per_entry: per-entry metadata (histogram, box statistics...)
    :param animals: number of animals in the barn
    :param fps: processing rate, used for the raw traffic projection
    """

    cadence_entries_per_year: int = 8760
    bytes_per_embedding: int = 768
    metadata_bytes_per_entry: int = 10_000
    animals: int = 1
    fps: float = 5.0

    def __post_init__(self) -> None:
        values = (
            self.cadence_entries_per_year,
            self.bytes_per_embedding,
            self.metadata_bytes_per_entry,
            self.animals,
            self.fps,
        )
        if any(v <= 0 for v in values):
            raise MalformedInputError(f"Storage policy values must be positive, got {values}")


@dataclass
class MotionSettings(Settings):
    """
    :param speed_px_per_frame: displacement of each animal per frame
    :param direction_change_prob: chance per frame of drawing a new heading
    """

    speed_px_per_frame: float = 4.0
    direction_change_prob: float = 0.1

    def __post_init__(self) -> None:
        if self.speed_px_per_frame < 0 or not 0 <= self.direction_change_prob <= 1:
            raise MalformedInputError(
                "speed must be >= 0 and direction_change_prob in [0, 1]"
            )


@dataclass
class EmbeddingModelSettings(Settings):
    """
    :param dim: embedding dimension
    :param cluster_separation: pairwise angle between identity cluster centres, in degrees [0, 90]
    :param noise_sigma: per-component std of the gaussian noise added before renormalising
    """

    dim: int = 384
    cluster_separation: float = 90.0
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise MalformedInputError(f"dim must be at least 2, got {self.dim}")
        if not 0 <= self.cluster_separation <= 90:
            raise MalformedInputError(
                f"cluster_separation must be an angle in [0, 90], got {self.cluster_separation}"
            )
        if self.noise_sigma < 0:
            raise MalformedInputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass
class ScenarioConfig(Settings):
    """
    Synthetic multi-animal tracking scenario

    :param num_identities: number of animals
    :param num_frames: clip length
    :param arena: (width, height) in pixels
    :param motion: random-walk motion settings
    :param box_size: (w, h) of every box in pixels
    :param switch_plan: (frame, identity_a, identity_b) permanent label swaps
    :param embedding_model: identity-conditioned embedding synthesis settings
    :param num_behaviours: number of behaviour classes drawn per frame
    :param fps: frame rate used to timestamp observations
    :param seed: unsigned 64-bit seed
    """

    num_identities: int = 8
    num_frames: int = 100
    arena: Tuple[float, float] = (1280.0, 720.0)
    motion: MotionSettings = field(default_factory=MotionSettings)
    box_size: Tuple[float, float] = (120.0, 80.0)
    switch_plan: List[Tuple[int, int, int]] = field(default_factory=list)
    embedding_model: EmbeddingModelSettings = field(
        default_factory=EmbeddingModelSettings
    )
    num_behaviours: int = 9
    fps: float = 5.0
    seed: int = 0

    def __post_init__(self) -> None:
        try:
            self.arena = tuple(float(v) for v in self.arena)
            self.box_size = tuple(float(v) for v in self.box_size)
            self.switch_plan = [tuple(int(v) for v in s) for s in self.switch_plan]
        except (TypeError, ValueError) as e:
            raise MalformedInputError(f"Invalid arena, box_size or switch_plan: {e}") from e
        if len(self.arena) != 2 or len(self.box_size) != 2:
            raise MalformedInputError(
                f"arena and box_size must be (width, height) pairs, got {self.arena} "
                f"and {self.box_size}"
            )
        for switch in self.switch_plan:
            if len(switch) != 3:
                raise MalformedInputError(
                    f"Switch plan entries are (frame, identity_a, identity_b), got {list(switch)}"
                )
        if self.num_identities < 1 or self.num_frames < 1:
            raise MalformedInputError("num_identities and num_frames must be positive")
        if min(self.arena) <= 0 or min(self.box_size) <= 0:
            raise MalformedInputError("arena and box_size must be positive")
        if self.fps <= 0 or self.num_behaviours < 1:
            raise MalformedInputError("fps and num_behaviours must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise MalformedInputError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.embedding_model.dim < self.num_identities + 1:
            raise MalformedInputError(
                f"Embedding dim {self.embedding_model.dim} is too small for "
                f"{self.num_identities} separated identity clusters"
            )
        for frame, a, b in self.switch_plan:
            if not 2 <= frame <= self.num_frames:
                raise MalformedInputError(
                    f"Switch frame {frame} outside [2, {self.num_frames}]"
                )
            if a == b:
                raise MalformedInputError(f"Switch at frame {frame} swaps {a} with itself")
            for identity in (a, b):
                if not 1 <= identity <= self.num_identities:
                    raise MalformedInputError(f"Unknown identity {identity} in switch plan")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioConfig":
        """Build a config from a JSON document using the field names above"""
        data = dict(data)
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise MalformedInputError(f"Unknown scenario fields: {sorted(unknown)}")
        try:
            if "motion" in data:
                data["motion"] = MotionSettings(**data["motion"])
            if "embedding_model" in data:
                data["embedding_model"] = EmbeddingModelSettings(**data["embedding_model"])
            return cls(**data)
        except MalformedInputError:
            raise
        except (TypeError, ValueError) as e:
            raise MalformedInputError(f"Invalid scenario document: {e}") from e


@dataclass
class SweepGrid(Settings):
    """
    Parameter grid for the re-identification sensitivity sweep

    :param tau_low: candidate tau_low values
    :param tau_high: candidate tau_high values
    :param cadence_s: candidate bank cadences in seconds
    """

    tau_low: List[float] = field(default_factory=lambda: [0.65])
    tau_high: List[float] = field(default_factory=lambda: [0.78])
    cadence_s: List[float] = field(default_factory=lambda: [3600.0])

    def __post_init__(self) -> None:
        if not (self.tau_low and self.tau_high and self.cadence_s):
            raise MalformedInputError("Sweep grid must be non-empty on every axis")

    def points(self) -> Iterator[Tuple[float, float, float]]:
        return itertools.product(self.tau_low, self.tau_high, self.cadence_s)

    @classmethod
    def parse(cls, text: str) -> "SweepGrid":
        """Parse `tau_low=0.6,0.65;tau_high=0.78,0.9;cadence_s=3600`"""
        values: Dict[str, List[float]] = {}
        for part in filter(None, (p.strip() for p in text.split(";"))):
            key, sep, raw = part.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in cls.__dataclass_fields__:
                raise MalformedInputError(f"Invalid sweep axis '{part}'")
            try:
                values[key] = [float(v) for v in raw.split(",") if v.strip()]
            except ValueError as e:
                raise MalformedInputError(f"Invalid sweep values '{raw}'") from e
        return cls(**values)
