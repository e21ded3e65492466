"""Embedding-pool re-identification loop"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Union

import numpy as np

from herdwatch.common.enumerations import Precision
from herdwatch.common.errors import DegenerateInputError, EmptyDataError, MalformedInputError
from herdwatch.common.logging_ import Logger
from herdwatch.common.type_aliases import BoundingBox, IdentityId, ReidEvent, ReinitDirective
from herdwatch.common.utils import build_logger
from herdwatch.reid.bank import BankEntry, EmbeddingBank, EmbeddingVector, uniform_histogram
from herdwatch.settings import LoggerSettings, ReidConfig

Vector = Union[EmbeddingVector, np.ndarray]


def _values(v: Vector) -> np.ndarray:
    return v.values if isinstance(v, EmbeddingVector) else np.asarray(v, dtype=np.float64)


def cosine_sim(a: Vector, b: Vector) -> float:
    """Cosine similarity in [-1, 1]; zero-norm vectors raise DegenerateInputError"""
    a, b = _values(a), _values(b)
    if a.shape != b.shape:
        raise MalformedInputError(f"Embedding dims differ: {a.shape} vs {b.shape}")
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm == 0:
        raise DegenerateInputError("Cosine similarity of a zero-norm embedding")
    return float(np.clip(np.dot(a, b) / norm, -1.0, 1.0))


def ema_update(prev: Vector, cur: Vector, alpha: float) -> EmbeddingVector:
    """alpha * cur + (1 - alpha) * prev, alpha weights the current observation"""
    if not 0 < alpha <= 1:
        raise MalformedInputError(f"alpha must be in (0, 1], got {alpha}")
    prev_values, cur_values = _values(prev), _values(cur)
    if prev_values.shape != cur_values.shape:
        raise MalformedInputError(
            f"Embedding dims differ: {prev_values.shape} vs {cur_values.shape}"
        )
    precision = cur.precision if isinstance(cur, EmbeddingVector) else Precision.HALF16
    return EmbeddingVector(alpha * cur_values + (1 - alpha) * prev_values, precision)


def bank_similarity(bank: EmbeddingBank, e_cur: Vector) -> float:
    """Max cosine of an embedding against every entry of a bank"""
    matrix = bank.matrix()
    e = _values(e_cur)
    if matrix.shape[1] != e.size:
        raise MalformedInputError(
            f"Embedding dim {e.size} does not match bank {bank.identity_id} dim {matrix.shape[1]}"
        )
    norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(e)
    if (norms == 0).any():
        raise DegenerateInputError(f"Zero-norm embedding against bank {bank.identity_id}")
    return float(np.clip(matrix @ e / norms, -1.0, 1.0).max())


@dataclass
class ObservationOutcome:
    """
    Result of one observation

    :param identity_id: identity the track continues as
    :param event: logged swap, if the claimed identity was reassigned
    :param directive: tracker re-initialisation instruction accompanying the event
    :param appended: bank entry written at cadence expiry
    """

    identity_id: IdentityId
    sim_self: float
    sim_other: float
    event: Optional[ReidEvent] = None
    directive: Optional[ReinitDirective] = None
    appended: Optional[BankEntry] = None


def process_observation(
    banks: Mapping[IdentityId, EmbeddingBank],
    claimed_id: IdentityId,
    e_cur: Vector,
    frame: int,
    now: float,
    cfg: ReidConfig = ReidConfig(),
    box: Optional[BoundingBox] = None,
    histograms: Optional[Mapping[IdentityId, np.ndarray]] = None,
) -> ObservationOutcome:
    """
    One step of the re-identification loop.

    The claimed identity is doubted when its bank similarity drops below tau_low and
    reassigned when another bank is more similar than tau_high. Independently, once
    `cadence_s` has elapsed since the continuing identity's last bank update, an EMA
    entry is appended to its bank. Banks are updated in place.

    :param banks: every tracked identity's bank, each with at least one entry
    :param claimed_id: identity the tracker reports
    :param e_cur: current embedding
    :param frame: frame number
    :param now: timestamp in seconds
    :param cfg: thresholds, EMA weight and cadence
    :param box: current box, carried by the re-init directive
    :param histograms: per-identity histogram stored with an appended entry, uniform if absent
    """
    if claimed_id not in banks:
        raise EmptyDataError(f"No embedding bank for claimed identity {claimed_id}")
    if not isinstance(e_cur, EmbeddingVector):
        e_cur = EmbeddingVector(e_cur)

    sim_self = bank_similarity(banks[claimed_id], e_cur)
    sim_other, best_other = -1.0, None
    for identity_id, bank in banks.items():
        if identity_id == claimed_id or len(bank) == 0:
            continue
        similarity = bank_similarity(bank, e_cur)
        if best_other is None or similarity > sim_other:
            sim_other, best_other = similarity, identity_id

    outcome = ObservationOutcome(claimed_id, sim_self, sim_other)
    if best_other is not None and sim_self < cfg.tau_low and sim_other > cfg.tau_high:
        outcome.identity_id = best_other
        outcome.event = ReidEvent(frame, claimed_id, best_other, sim_self, sim_other)
        outcome.directive = ReinitDirective(frame, claimed_id, best_other, box)

    bank = banks[outcome.identity_id]
    if bank.last_update is None or now - bank.last_update >= cfg.cadence_s:
        histogram = (histograms or {}).get(outcome.identity_id)
        if histogram is None:
            histogram = uniform_histogram(len(bank.latest.behaviour_histogram))
        entry = BankEntry(
            timestamp=now,
            embedding=ema_update(bank.latest.embedding, e_cur, cfg.alpha),
            behaviour_histogram=histogram,
        )
        bank.append(entry)
        outcome.appended = entry

    return outcome


class EmbeddingPool:
    """
    Stateful wrapper around `process_observation` which owns the banks, accumulates
    behaviour labels between bank updates and logs swaps.

    :param banks: initial banks, one per identity
    :param cfg: re-identification settings
    :param num_behaviours: number of behaviour classes in the histograms
    :param logger: the logger, defaults to one built from LoggerSettings()
    """

    def __init__(
        self,
        banks: Mapping[IdentityId, EmbeddingBank],
        cfg: ReidConfig = ReidConfig(),
        num_behaviours: int = 9,
        logger: Optional[Logger] = None,
    ) -> None:
        if not banks:
            raise EmptyDataError("The embedding pool needs at least one bank")
        self.banks: Dict[IdentityId, EmbeddingBank] = dict(banks)
        self.cfg = cfg
        self.num_behaviours = num_behaviours
        self.logger = logger if logger is not None else build_logger(LoggerSettings())
        self.events: List[ReidEvent] = []
        self._behaviour_counts = {
            identity_id: np.zeros(num_behaviours) for identity_id in self.banks
        }
        if not cfg.correction_enabled:
            self.logger.warning(
                f"tau_high={cfg.tau_high} can never be exceeded, identity correction is disabled"
            )

    def _histograms(self, behaviour: Optional[int]) -> Dict[IdentityId, np.ndarray]:
        """Histogram each identity would store now, counting the current label"""
        histograms = {}
        for identity_id, counts in self._behaviour_counts.items():
            counts = counts.copy()
            if behaviour is not None:
                counts[behaviour] += 1
            if counts.sum() == 0:
                histograms[identity_id] = uniform_histogram(self.num_behaviours)
            else:
                histograms[identity_id] = counts / counts.sum()
        return histograms

    def observe(
        self,
        claimed_id: IdentityId,
        e_cur: Vector,
        frame: int,
        now: float,
        box: Optional[BoundingBox] = None,
        behaviour: Optional[int] = None,
    ) -> ObservationOutcome:
        """
        Process one observation of a tracked animal.

        :param behaviour: behaviour class index observed in this frame
        """
        if behaviour is not None and not 0 <= behaviour < self.num_behaviours:
            raise MalformedInputError(
                f"Behaviour {behaviour} outside [0, {self.num_behaviours})"
            )
        outcome = process_observation(
            self.banks,
            claimed_id,
            e_cur,
            frame,
            now,
            self.cfg,
            box,
            self._histograms(behaviour),
        )
        counts = self._behaviour_counts[outcome.identity_id]
        if outcome.appended is not None:
            counts[:] = 0
        elif behaviour is not None:
            counts[behaviour] += 1

        if outcome.event is not None:
            self.events.append(outcome.event)
            self.logger.info(
                f"Frame {frame}: identity {claimed_id} reassigned to {outcome.identity_id} "
                f"(sim_self={outcome.sim_self:.3f}, sim_other={outcome.sim_other:.3f})"
            )
            self.logger.add_scalar("Reid/sim_self", outcome.sim_self, frame)
            self.logger.add_scalar("Reid/sim_other", outcome.sim_other, frame)
        return outcome
