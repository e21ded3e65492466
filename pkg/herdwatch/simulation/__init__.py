from herdwatch.simulation.harness import (
    PipelineRun,
    SweepRow,
    build_report,
    correct_stream,
    run_pipeline,
    sensitivity_sweep,
)
from herdwatch.simulation.scenario import Scenario, generate, seed_banks

__all__ = [
    "PipelineRun",
    "SweepRow",
    "build_report",
    "correct_stream",
    "run_pipeline",
    "sensitivity_sweep",
    "Scenario",
    "generate",
    "seed_banks",
]
