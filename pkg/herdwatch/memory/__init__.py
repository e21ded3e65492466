from herdwatch.memory.budget import (
    BudgetLine,
    BudgetReport,
    ComponentSpec,
    budget_report,
    checkpoint_size,
    compression_ratio,
    format_size,
    implied_bytes_per_parameter,
    relative_change,
)
from herdwatch.memory.session import (
    CacheClearEvent,
    ObjectCache,
    SessionState,
    memory_bytes,
    prune,
    simulate_stream,
    step,
    stream_summary,
    time_to_budget,
)

__all__ = [
    "BudgetLine",
    "BudgetReport",
    "ComponentSpec",
    "budget_report",
    "checkpoint_size",
    "compression_ratio",
    "format_size",
    "implied_bytes_per_parameter",
    "relative_change",
    "CacheClearEvent",
    "ObjectCache",
    "SessionState",
    "memory_bytes",
    "prune",
    "simulate_stream",
    "step",
    "stream_summary",
    "time_to_budget",
]
