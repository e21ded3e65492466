from herdwatch.reid.bank import (
    BankEntry,
    EmbeddingBank,
    EmbeddingVector,
    load_banks,
    save_banks,
)
from herdwatch.reid.engine import (
    EmbeddingPool,
    ObservationOutcome,
    cosine_sim,
    ema_update,
    process_observation,
)
from herdwatch.reid.storage import (
    annual_footprint,
    embedding_bytes,
    entries_per_year,
    raw_traffic_and_reduction,
)

__all__ = [
    "BankEntry",
    "EmbeddingBank",
    "EmbeddingVector",
    "load_banks",
    "save_banks",
    "EmbeddingPool",
    "ObservationOutcome",
    "cosine_sim",
    "ema_update",
    "process_observation",
    "annual_footprint",
    "embedding_bytes",
    "entries_per_year",
    "raw_traffic_and_reduction",
]
