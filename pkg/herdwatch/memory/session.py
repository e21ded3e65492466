"""
Tracker-session memory model with sliding-window pruning.

Every processed frame stores one non-conditioning output per tracked object. Without
pruning the session grows linearly; pruning keeps only the most recent `keep_last`
outputs per object and runs every `interval` processed frames. Sizes are integer
bytes, MB and GB are decimal.
"""

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

from herdwatch.common.errors import MalformedInputError
from herdwatch.common.logging_ import Logger
from herdwatch.common.type_aliases import IdentityId
from herdwatch.settings import MemoryModelParams, PruneSettings

MemoryTrace = List[Tuple[int, int]]


@dataclass
class ObjectCache:
    """
    :param cond_frame_bytes: size of the conditioning-frame output, never pruned
    :param non_cond_outputs: frame index -> bytes, in increasing frame order
    """

    cond_frame_bytes: int = 0
    non_cond_outputs: "OrderedDict[int, int]" = field(default_factory=OrderedDict)

    @property
    def nbytes(self) -> int:
        return self.cond_frame_bytes + sum(self.non_cond_outputs.values())


@dataclass(frozen=True)
class CacheClearEvent:
    """Marker for the allocator cache release that follows a prune"""

    frame: int
    freed_bytes: int


@dataclass
class SessionState:
    """
    Single-writer tracker session.

    :param prune_settings: keep_last / interval / enabled
    :param base_bytes: footprint independent of the tracked objects
    """

    prune_settings: PruneSettings = field(default_factory=PruneSettings)
    base_bytes: int = 0
    objects: Dict[IdentityId, ObjectCache] = field(default_factory=dict)
    frames_processed: int = 0
    last_frame: Optional[int] = None
    events: List[CacheClearEvent] = field(default_factory=list)

    def add_object(self, object_id: IdentityId, cond_frame_bytes: int = 0) -> None:
        if object_id in self.objects:
            raise MalformedInputError(f"Object {object_id} is already tracked")
        if cond_frame_bytes < 0:
            raise MalformedInputError("Conditioning frame size must be non-negative")
        self.objects[object_id] = ObjectCache(cond_frame_bytes=int(cond_frame_bytes))


def prune(s: SessionState) -> SessionState:
    """
    Keep only the `keep_last` most recent non-conditioning outputs of every object
    and record a cache-clear marker.
    """
    keep_last = s.prune_settings.keep_last
    freed = 0
    for cache in s.objects.values():
        excess = len(cache.non_cond_outputs) - keep_last
        # oldest first, frame indices are inserted in increasing order
        for _ in range(max(excess, 0)):
            _, size = cache.non_cond_outputs.popitem(last=False)
            freed += size
    s.events.append(CacheClearEvent(frame=s.last_frame or 0, freed_bytes=freed))
    return s


def step(
    s: SessionState,
    frame_index: int,
    per_object_bytes: Union[int, Mapping[IdentityId, int]],
) -> SessionState:
    """
    Process one frame: store one output per object, prune on the interval.

    :param s: the session, updated in place
    :param frame_index: must exceed every cached frame index
    :param per_object_bytes: one size for every object, or a size per object id
    :return: the updated session
    """
    if s.last_frame is not None and frame_index <= s.last_frame:
        raise MalformedInputError(
            f"Frame {frame_index} does not follow the last processed frame {s.last_frame}"
        )
    sizes = {}
    for object_id in s.objects:
        if isinstance(per_object_bytes, Mapping):
            size = per_object_bytes.get(object_id, 0)
        else:
            size = per_object_bytes
        if size < 0:
            raise MalformedInputError(f"Negative entry size {size} for object {object_id}")
        sizes[object_id] = int(size)
    for object_id, cache in s.objects.items():
        cache.non_cond_outputs[frame_index] = sizes[object_id]

    s.last_frame = frame_index
    s.frames_processed += 1
    if s.prune_settings.enabled and s.frames_processed % s.prune_settings.interval == 0:
        prune(s)
    return s


def memory_bytes(s: SessionState) -> int:
    """Base footprint plus every conditioning and non-conditioning entry"""
    return s.base_bytes + sum(cache.nbytes for cache in s.objects.values())


def new_session(params: MemoryModelParams, prune_settings: PruneSettings) -> SessionState:
    session = SessionState(prune_settings=prune_settings, base_bytes=params.base_bytes)
    for object_id in range(1, params.num_objects + 1):
        session.add_object(object_id, params.cond_bytes)
    return session


def simulate_stream(
    params: MemoryModelParams,
    frames: int,
    prune_enabled: bool = True,
    prune_settings: PruneSettings = PruneSettings(),
    logger: Optional[Logger] = None,
) -> MemoryTrace:
    """
    Drive a session with constant-size entries.

    :param params: memory model
    :param frames: number of frames, at least 1
    :param prune_enabled: overrides `prune_settings.enabled`
    :param prune_settings: keep_last / interval
    :param logger: optional logger, the trace goes to tensorboard as Memory/session_bytes
    :return: (frame, bytes) after each frame
    """
    if frames < 1:
        raise MalformedInputError(f"frames must be at least 1, got {frames}")
    settings = PruneSettings(
        keep_last=prune_settings.keep_last,
        interval=prune_settings.interval,
        enabled=prune_enabled,
    )
    session = new_session(params, settings)
    trace = []
    for frame in range(1, frames + 1):
        step(session, frame, params.entry_bytes)
        footprint = memory_bytes(session)
        trace.append((frame, footprint))
        if logger is not None:
            logger.add_scalar("Memory/session_bytes", footprint, frame)
    if logger is not None:
        logger.debug(
            f"Simulated {frames} frames, final footprint {trace[-1][1]} B, "
            f"{len(session.events)} cache clears"
        )
    return trace


def time_to_budget(params: MemoryModelParams) -> float:
    """Seconds until an unpruned session fills the budget: (budget - base) / (k * objects * fps)"""
    headroom = params.budget_bytes - params.base_bytes
    if headroom <= 0:
        return 0.0
    rate = params.entry_bytes * params.num_objects * params.fps
    return headroom / rate


def steady_state_bytes(
    params: MemoryModelParams, prune_settings: PruneSettings = PruneSettings()
) -> int:
    """Footprint right after a prune: base + objects * (cond + keep_last * k)"""
    per_object = params.cond_bytes + prune_settings.keep_last * params.entry_bytes
    return params.base_bytes + params.num_objects * per_object


def pruned_bound_bytes(
    params: MemoryModelParams, prune_settings: PruneSettings = PruneSettings()
) -> int:
    """Upper bound of a pruned session at any stream length"""
    per_object = params.cond_bytes + (
        prune_settings.keep_last + prune_settings.interval
    ) * params.entry_bytes
    return params.base_bytes + params.num_objects * per_object


@dataclass
class StreamSummary:
    frames: int
    prune_enabled: bool
    final_bytes: int
    peak_bytes: int
    bound_bytes: int
    steady_state_bytes: int
    time_to_budget_s: float
    unit_mode: str = "decimal"


def stream_summary(
    params: MemoryModelParams,
    frames: int,
    prune_enabled: bool = True,
    prune_settings: PruneSettings = PruneSettings(),
    logger: Optional[Logger] = None,
) -> StreamSummary:
    trace = simulate_stream(params, frames, prune_enabled, prune_settings, logger)
    return StreamSummary(
        frames=frames,
        prune_enabled=prune_enabled,
        final_bytes=trace[-1][1],
        peak_bytes=max(b for _, b in trace),
        bound_bytes=pruned_bound_bytes(params, prune_settings),
        steady_state_bytes=steady_state_bytes(params, prune_settings),
        time_to_budget_s=time_to_budget(params),
    )
