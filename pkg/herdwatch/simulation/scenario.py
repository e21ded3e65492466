"""
Synthetic multi-animal tracking scenarios with injected identity switches.

Each identity random-walks inside its own cell of a grid partition of the arena, so
boxes of different identities never overlap and injected label swaps are the only
source of identity error. Embeddings are drawn around unit cluster centres with a
fixed pairwise angle.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from herdwatch.common.enumerations import Precision
from herdwatch.common.errors import MalformedInputError
from herdwatch.common.type_aliases import BoundingBox, IdentityId, TrackRecord, TrackSet
from herdwatch.common.utils import make_rng
from herdwatch.reid.bank import BankEntry, EmbeddingBank, EmbeddingVector
from herdwatch.settings import ScenarioConfig

FrameKey = Tuple[int, IdentityId]


@dataclass
class Scenario:
    """
    :param ground_truth: true identities
    :param corrupted: the same boxes with swapped labels from each switch frame onward
    :param true_embeddings: (frame, true identity) -> unit embedding
    :param behaviours: (frame, true identity) -> behaviour class index
    :param true_identity_of: (frame, corrupted label) -> true identity
    :param injected_switch_count: number of pairwise swaps applied
    :param cluster_centers: (identities, dim) unit cluster centres
    """

    config: ScenarioConfig
    ground_truth: TrackSet
    corrupted: TrackSet
    true_embeddings: Dict[FrameKey, np.ndarray] = field(default_factory=dict)
    behaviours: Dict[FrameKey, int] = field(default_factory=dict)
    true_identity_of: Dict[FrameKey, IdentityId] = field(default_factory=dict)
    injected_switch_count: int = 0
    cluster_centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def timestamp(self, frame: int) -> float:
        """Seconds since the start of the clip"""
        return (frame - 1) / self.config.fps


def grid_cells(cfg: ScenarioConfig) -> List[Tuple[float, float, float, float]]:
    """
    One (x0, y0, width, height) cell per identity.
    Raises MalformedInputError when a box does not fit in a cell.
    """
    n = cfg.num_identities
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    width, height = cfg.arena
    cell_w, cell_h = width / cols, height / rows
    box_w, box_h = cfg.box_size
    if box_w > cell_w or box_h > cell_h:
        raise MalformedInputError(
            f"Arena {cfg.arena} is overcrowded: {n} boxes of {cfg.box_size} need cells of at "
            f"least that size, got {cell_w:.1f} x {cell_h:.1f}"
        )
    return [((i % cols) * cell_w, (i // cols) * cell_h, cell_w, cell_h) for i in range(n)]


def cluster_centers(
    rng: np.random.Generator, num_identities: int, dim: int, separation_deg: float
) -> np.ndarray:
    """
    Unit vectors with pairwise cosine cos(separation): sqrt(1 - rho) e_i + sqrt(rho) u
    over a random orthonormal basis {e_1..e_n, u}.
    """
    basis, _ = np.linalg.qr(rng.standard_normal((dim, num_identities + 1)))
    rho = max(math.cos(math.radians(separation_deg)), 0.0)
    shared = basis[:, num_identities]
    return np.stack(
        [
            math.sqrt(1 - rho) * basis[:, i] + math.sqrt(rho) * shared
            for i in range(num_identities)
        ]
    )


def _walk(
    rng: np.random.Generator, cfg: ScenarioConfig, cell: Tuple[float, float, float, float]
) -> np.ndarray:
    """(frames, 2) top-left positions of one box bouncing inside its cell"""
    x0, y0, cell_w, cell_h = cell
    box_w, box_h = cfg.box_size
    low = np.array([x0, y0])
    high = np.array([x0 + cell_w - box_w, y0 + cell_h - box_h])
    speed = cfg.motion.speed_px_per_frame

    position = low + rng.random(2) * (high - low)
    heading = rng.uniform(0, 2 * math.pi)
    velocity = speed * np.array([math.cos(heading), math.sin(heading)])
    positions = np.empty((cfg.num_frames, 2))
    positions[0] = position
    for t in range(1, cfg.num_frames):
        if rng.random() < cfg.motion.direction_change_prob:
            heading = rng.uniform(0, 2 * math.pi)
            velocity = speed * np.array([math.cos(heading), math.sin(heading)])
        position = position + velocity
        # bounce off the cell walls
        for axis in range(2):
            if position[axis] < low[axis]:
                position[axis] = 2 * low[axis] - position[axis]
                velocity[axis] = -velocity[axis]
            elif position[axis] > high[axis]:
                position[axis] = 2 * high[axis] - position[axis]
                velocity[axis] = -velocity[axis]
        position = np.clip(position, low, high)
        positions[t] = position
    return positions


def generate(cfg: ScenarioConfig) -> Scenario:
    """
    Build a deterministic scenario from its config.

    :param cfg: scenario config, `cfg.seed` drives a Philox generator
    :return: ground truth, corrupted stream, embeddings and behaviour labels
    """
    rng = make_rng(cfg.seed)
    cells = grid_cells(cfg)
    identities = list(range(1, cfg.num_identities + 1))
    model = cfg.embedding_model

    paths = {i: _walk(rng, cfg, cells[i - 1]) for i in identities}
    centers = cluster_centers(rng, cfg.num_identities, model.dim, model.cluster_separation)
    behaviour_dists = rng.dirichlet(np.ones(cfg.num_behaviours), size=cfg.num_identities)

    swaps_by_frame: Dict[int, List[Tuple[int, int]]] = {}
    for frame, a, b in cfg.switch_plan:
        swaps_by_frame.setdefault(frame, []).append((a, b))

    scenario = Scenario(
        config=cfg,
        ground_truth=TrackSet(),
        corrupted=TrackSet(),
        injected_switch_count=len(cfg.switch_plan),
        cluster_centers=centers,
    )
    # displayed label of each true identity
    label_of = {i: i for i in identities}
    box_w, box_h = cfg.box_size
    for frame in range(1, cfg.num_frames + 1):
        for a, b in swaps_by_frame.get(frame, []):
            holder = {label: true for true, label in label_of.items()}
            label_of[holder[a]], label_of[holder[b]] = b, a

        for i in identities:
            x, y = paths[i][frame - 1]
            box = BoundingBox(float(x), float(y), box_w, box_h)
            scenario.ground_truth.add(TrackRecord(frame, i, box))
            scenario.corrupted.add(TrackRecord(frame, label_of[i], box))
            scenario.true_identity_of[(frame, label_of[i])] = i

            embedding = centers[i - 1]
            if model.noise_sigma > 0:
                embedding = embedding + model.noise_sigma * rng.standard_normal(model.dim)
                embedding = embedding / np.linalg.norm(embedding)
            scenario.true_embeddings[(frame, i)] = embedding
            scenario.behaviours[(frame, i)] = int(
                rng.choice(cfg.num_behaviours, p=behaviour_dists[i - 1])
            )
    return scenario


def seed_banks(
    scenario: Scenario,
    warmup_frames: int,
    precision: Precision = Precision.HALF16,
) -> Dict[IdentityId, EmbeddingBank]:
    """
    One bank per identity from the true associations of the first `warmup_frames` frames:
    the normalised mean embedding and the behaviour histogram of those frames.
    """
    cfg = scenario.config
    if not 1 <= warmup_frames <= cfg.num_frames:
        raise MalformedInputError(
            f"warmup_frames must be in [1, {cfg.num_frames}], got {warmup_frames}"
        )
    banks = {}
    for i in scenario.ground_truth.identities():
        frames = range(1, warmup_frames + 1)
        mean = np.mean([scenario.true_embeddings[(t, i)] for t in frames], axis=0)
        counts = np.bincount(
            [scenario.behaviours[(t, i)] for t in frames], minlength=cfg.num_behaviours
        )
        entry = BankEntry(
            timestamp=scenario.timestamp(warmup_frames),
            embedding=EmbeddingVector(mean / np.linalg.norm(mean), precision),
            behaviour_histogram=counts / counts.sum(),
        )
        banks[i] = EmbeddingBank(i, [entry])
    return banks
