"""
Command-line entry point. Every subcommand writes one JSON document, its result with
the run manifest, to standard output; diagnostics go to standard error.

Exit codes: 0 ok, 2 malformed input, 3 empty data, 4 numeric degeneracy.
"""

import csv
import json
import logging
import sys
from argparse import ArgumentParser, Namespace
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from herdwatch import __version__
from herdwatch.callbacks.checkpoint_callback import CheckpointCallback
from herdwatch.common.enumerations import DistanceMode, Precision, UnitMode
from herdwatch.common.errors import HerdwatchError, MalformedInputError
from herdwatch.common.logging_ import Logger
from herdwatch.common.utils import build_logger, file_digest, set_seed, to_jsonable
from herdwatch.distillation.fidelity import fidelity, fidelity_band
from herdwatch.distillation.gradcheck import gradient_check
from herdwatch.distillation.losses import DEFAULT_EPS, compute_loss
from herdwatch.formats.confusion import load_confusion
from herdwatch.formats.tensors import load_tensor
from herdwatch.formats.tracks import load_tracks, save_tracks
from herdwatch.memory.budget import budget_from_dict, budget_report, format_size, format_table
from herdwatch.memory.session import simulate_stream, stream_summary
from herdwatch.metrics.classification import report, top_confusions
from herdwatch.metrics.mot import evaluate_sequence
from herdwatch.reid.storage import (
    annual_footprint,
    embedding_bytes,
    entries_per_year,
    raw_traffic_and_reduction,
)
from herdwatch.settings import (
    LoggerSettings,
    LossSettings,
    LossWeights,
    MemoryModelParams,
    MetricSettings,
    PruneSettings,
    ReidConfig,
    ScenarioConfig,
    StoragePolicy,
    SweepGrid,
)
from herdwatch.simulation.harness import build_report, correct_stream, sensitivity_sweep
from herdwatch.simulation.scenario import generate


@dataclass
class RunManifest:
    """
    Reproducibility envelope of one invocation

    :param subcommand: the subcommand name
    :param config: every resolved setting, defaults included
    :param input_digests: input path -> SHA-256 hex digest
    :param version: tool version
    :param seed: random seed, if the subcommand draws random numbers
    """

    subcommand: str
    config: Dict[str, Any]
    input_digests: Dict[str, str] = field(default_factory=dict)
    version: str = __version__
    seed: Optional[int] = None


@dataclass
class Command:
    """A parsed subcommand: its manifest and a deferred runner returning the result"""

    manifest: RunManifest
    run: Callable[[Logger], Any]
    raw_output: bool = False


def _digests(paths: Sequence[str]) -> Dict[str, str]:
    return {path: file_digest(path) for path in paths}


def _load_json(path: str) -> Any:
    with open(path) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise MalformedInputError(f"{path}: {e}") from e


def mot_eval(args: Namespace) -> Command:
    settings = MetricSettings(
        iou_gate=args.iou, distance_mode=args.motp, mt_threshold=args.mt, ml_threshold=args.ml
    )
    manifest = RunManifest("mot-eval", settings.to_dict(), _digests([args.gt, args.pred]))

    def run(logger: Logger) -> Any:
        gt = load_tracks(args.gt)
        pred = load_tracks(args.pred)
        if gt.frame_range and pred.frame_range and pred.frame_range != gt.frame_range:
            logger.warning(
                f"Frame ranges differ: ground truth {gt.frame_range}, predictions {pred.frame_range}"
            )
        summary = evaluate_sequence(gt, pred, settings)
        logger.add_scalars("Mot", to_jsonable(summary), 0)
        return summary

    return Command(manifest, run)


def loss_eval(args: Namespace) -> Command:
    weights = LossWeights.parse(args.weights)
    settings = LossSettings(eps=DEFAULT_EPS if args.eps else None)
    config = {
        "weights": weights.to_dict(),
        "loss": settings.to_dict(),
        "gradcheck": args.gradcheck,
    }
    manifest = RunManifest("loss-eval", config, _digests([args.student, args.teacher]))

    def run(logger: Logger) -> Any:
        student = load_tensor(args.student)
        teacher = load_tensor(args.teacher)
        breakdown = compute_loss(student, teacher, weights, settings)
        report_ = fidelity(student, teacher, settings)
        result = {
            "loss": breakdown,
            "fidelity": report_,
            "fidelity_in_band": fidelity_band(report_),
        }
        if args.gradcheck:
            result["gradcheck_max_rel_error"] = gradient_check(
                student, teacher, weights, settings
            )
        logger.add_scalars("Loss", to_jsonable(breakdown), 0)
        return result

    return Command(manifest, run)


def reid_sim(args: Namespace) -> Command:
    scenario_doc = _load_json(args.scenario)
    if args.seed is not None:
        scenario_doc["seed"] = args.seed
    scenario_cfg = ScenarioConfig.from_dict(scenario_doc)
    reid = ReidConfig(
        tau_low=args.tau_low, tau_high=args.tau_high, alpha=args.alpha, cadence_s=args.cadence_s
    )
    grid = SweepGrid.parse(args.sweep) if args.sweep else None
    config = {
        "scenario": scenario_cfg.to_dict(),
        "reid": reid.to_dict(),
        "warmup_frames": args.warmup_frames,
        "sweep": grid.to_dict() if grid else None,
    }
    manifest = RunManifest("reid-sim", config, _digests([args.scenario]), seed=scenario_cfg.seed)

    def run(logger: Logger) -> Any:
        set_seed(scenario_cfg.seed)
        if grid is not None:
            return sensitivity_sweep(scenario_cfg, reid, grid, args.warmup_frames, logger)
        scenario = generate(scenario_cfg)
        callbacks = []
        if args.checkpoint_dir:
            callbacks.append(
                CheckpointCallback(
                    logger, save_freq=args.checkpoint_freq, save_path=args.checkpoint_dir
                )
            )
        pipeline_run = correct_stream(scenario, reid, args.warmup_frames, logger, callbacks)
        if args.corrected_out:
            save_tracks(pipeline_run.corrected, args.corrected_out)
        return build_report(scenario, pipeline_run, logger=logger)

    return Command(manifest, run)


def prune_sim(args: Namespace) -> Command:
    params = MemoryModelParams(
        per_frame_per_object_mb=args.per_frame_mb,
        base_mb=args.base_mb,
        num_objects=args.objects,
        fps=args.fps,
        budget_gb=args.budget_gb,
        cond_frame_mb=args.cond_mb,
    )
    prune_settings = PruneSettings(keep_last=args.keep, interval=args.interval, enabled=not args.no_prune)
    config = {
        "params": params.to_dict(),
        "prune": prune_settings.to_dict(),
        "frames": args.frames,
        "format": args.format,
    }
    manifest = RunManifest("prune-sim", config)

    if args.format == "csv":

        def run_csv(logger: Logger) -> Any:
            trace = simulate_stream(
                params, args.frames, prune_settings.enabled, prune_settings, logger
            )
            writer = csv.writer(sys.stdout, lineterminator="\n")
            writer.writerow(["frame", "bytes"])
            writer.writerows(trace)

        return Command(manifest, run_csv, raw_output=True)

    def run(logger: Logger) -> Any:
        summary = stream_summary(params, args.frames, prune_settings.enabled, prune_settings, logger)
        per_object_steady = prune_settings.keep_last * params.entry_bytes
        return {
            "summary": summary,
            "steady_state_per_object_bytes": per_object_steady,
            "steady_state_per_object_mb": format_size(per_object_steady, UnitMode.DECIMAL, "M")[0],
        }

    return Command(manifest, run)


def storage(args: Namespace) -> Command:
    cadence_s = args.cadence_h * 3600
    policy = StoragePolicy(
        cadence_entries_per_year=entries_per_year(cadence_s),
        bytes_per_embedding=embedding_bytes(args.dim, args.precision),
        metadata_bytes_per_entry=int(round(args.metadata_kb * 1000)),
        animals=args.animals,
        fps=args.fps,
    )
    config = {"policy": policy.to_dict(), "cadence_s": cadence_s, "dim": args.dim, "precision": args.precision}
    manifest = RunManifest("storage", config)

    def run(logger: Logger) -> Any:
        raw, per_animal, barn = annual_footprint(policy)
        daily, reduction = raw_traffic_and_reduction(policy, cadence_s)
        return {
            "unit_mode": UnitMode.DECIMAL.value,
            "raw_embedding_bytes_per_animal_year": raw,
            "total_bytes_per_animal_year": per_animal,
            "barn_bytes_per_year": barn,
            "raw_embedding_mb_per_animal_year": format_size(raw, UnitMode.DECIMAL, "M")[0],
            "total_mb_per_animal_year": format_size(per_animal, UnitMode.DECIMAL, "M")[0],
            "barn_gb_per_year": format_size(barn, UnitMode.DECIMAL, "G")[0],
            "raw_traffic_bytes_per_animal_day": daily,
            "reduction_factor": reduction,
        }

    return Command(manifest, run)


def budget(args: Namespace) -> Command:
    document = _load_json(args.lines)
    if isinstance(document, list):
        document = {"lines": document, "envelope_gb": args.envelope}
    elif args.envelope is not None:
        document["envelope_gb"] = args.envelope
    if document.get("envelope_gb") is None:
        raise MalformedInputError("An envelope is required, pass --envelope or set envelope_gb")
    lines, envelope = budget_from_dict(document)
    config = {"envelope_gb": envelope, "unit_mode": args.unit_mode, "format": args.format}
    manifest = RunManifest("budget", config, _digests([args.lines]))

    def run(logger: Logger) -> Any:
        result = budget_report(lines, envelope, args.unit_mode)
        if args.format == "table":
            sys.stdout.write(format_table(result) + "\n")
            return None
        return result

    return Command(manifest, run, raw_output=args.format == "table")


def cls_eval(args: Namespace) -> Command:
    manifest = RunManifest("cls-eval", {"top_k": args.top_k}, _digests([args.confusion]))

    def run(logger: Logger) -> Any:
        cm = load_confusion(args.confusion)
        result = report(cm)
        return {
            "report": result,
            "top_confusions": [
                {"true": t, "pred": p, "count": c, "fraction_of_true_class": f}
                for t, p, c, f in top_confusions(cm, args.top_k)
            ],
        }

    return Command(manifest, run)


def plot_memory_cmd(args: Namespace) -> Command:
    config = {
        "save_path": args.save_path,
        "save_types": args.save_types,
        "budget_gb": args.budget_gb,
        "unit_mode": args.unit_mode,
    }
    manifest = RunManifest("plot-memory", config, _digests(args.traces))

    def run(logger: Logger) -> Any:
        import matplotlib

        matplotlib.use("Agg")
        from herdwatch.plot import plot_memory

        plot_memory(
            args.traces,
            legend=args.legend,
            budget_bytes=args.budget_gb * 1e9 if args.budget_gb is not None else None,
            unit_mode=args.unit_mode,
            save_types=args.save_types,
            save_path=args.save_path,
        )
        return {"saved": [f"{args.save_path}.{t}" for t in args.save_types]}

    return Command(manifest, run)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="herdwatch", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"herdwatch {__version__}")
    parser.add_argument("--manifest-only", action="store_true")
    parser.add_argument("--log-level", type=str, default="INFO")
    parser.add_argument("--log-path", type=str)
    parser.add_argument("--tensorboard-log-path", type=str)
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("mot-eval", help="CLEAR-MOT and IDF1 of a prediction file")
    p.add_argument("gt", type=str)
    p.add_argument("pred", type=str)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument(
        "--motp", type=str, default="center", choices=[m.value for m in DistanceMode]
    )
    p.add_argument("--mt", type=float, default=0.8)
    p.add_argument("--ml", type=float, default=0.2)
    p.add_argument("--out", type=str, default="json", choices=["json"])
    p.set_defaults(handler=mot_eval)

    p = subparsers.add_parser("loss-eval", help="distillation loss and fidelity of two tensors")
    p.add_argument("student", type=str)
    p.add_argument("teacher", type=str)
    p.add_argument("--weights", type=str, default="1.0,0.5,0.3,0.1")
    p.add_argument("--gradcheck", action="store_true")
    p.add_argument("--eps", action="store_true", help=f"clamp norms at {DEFAULT_EPS}")
    p.set_defaults(handler=loss_eval)

    p = subparsers.add_parser("reid-sim", help="re-identification loop on a synthetic scenario")
    p.add_argument("scenario", type=str)
    p.add_argument("--tau-low", type=float, default=0.65)
    p.add_argument("--tau-high", type=float, default=0.78)
    p.add_argument("--alpha", type=float, default=0.7)
    p.add_argument("--cadence-s", type=float, default=3600.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--warmup-frames", type=int, default=1)
    p.add_argument("--sweep", type=str, help="tau_low=..;tau_high=..;cadence_s=..")
    p.add_argument("--corrected-out", type=str)
    p.add_argument("--checkpoint-dir", type=str)
    p.add_argument("--checkpoint-freq", type=int, default=100)
    p.set_defaults(handler=reid_sim)

    p = subparsers.add_parser("prune-sim", help="session memory growth with pruning")
    p.add_argument("--objects", type=int, default=8)
    p.add_argument("--per-frame-mb", type=float, default=5.6)
    p.add_argument("--base-mb", type=float, default=0.0)
    p.add_argument("--cond-mb", type=float, default=0.0)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--budget-gb", type=float, default=16.0)
    p.add_argument("--frames", type=int, default=600)
    p.add_argument("--keep", type=int, default=8)
    p.add_argument("--interval", type=int, default=25)
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--format", type=str, default="json", choices=["json", "csv"])
    p.set_defaults(handler=prune_sim)

    p = subparsers.add_parser("storage", help="embedding-bank storage footprint")
    p.add_argument("--animals", type=int, default=1)
    p.add_argument("--cadence-h", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=384)
    p.add_argument(
        "--precision", type=str, default="half16", choices=[m.value for m in Precision]
    )
    p.add_argument("--metadata-kb", type=float, default=10.0)
    p.add_argument("--fps", type=float, default=5.0)
    p.set_defaults(handler=storage)

    p = subparsers.add_parser("budget", help="device memory budget")
    p.add_argument("--lines", type=str, required=True)
    p.add_argument("--envelope", type=float)
    p.add_argument(
        "--unit-mode", type=str, default="decimal", choices=[m.value for m in UnitMode]
    )
    p.add_argument("--format", type=str, default="json", choices=["json", "table"])
    p.set_defaults(handler=budget)

    p = subparsers.add_parser("cls-eval", help="classification report of a confusion matrix")
    p.add_argument("confusion", type=str)
    p.add_argument("--top-k", type=int, default=5)
    p.set_defaults(handler=cls_eval)

    p = subparsers.add_parser("plot-memory", help="plot prune-sim CSV traces")
    p.add_argument("traces", nargs="+", type=str)
    p.add_argument("--legend", nargs="+", type=str)
    p.add_argument("--budget-gb", type=float)
    p.add_argument(
        "--unit-mode", type=str, default="decimal", choices=[m.value for m in UnitMode]
    )
    p.add_argument("--save-types", nargs="+", type=str, default=["pdf"])
    p.add_argument("--save-path", type=str, default="plots/memory")
    p.set_defaults(handler=plot_memory_cmd)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.getLevelName(args.log_level.upper())
    if not isinstance(level, int):
        level = logging.INFO
    logger = build_logger(
        LoggerSettings(
            log_path=args.log_path,
            tensorboard_log_path=args.tensorboard_log_path,
            stream_handler_level=level,
        )
    )
    try:
        command = args.handler(args)
        if args.manifest_only:
            json.dump(to_jsonable(command.manifest), sys.stdout, indent=2)
            sys.stdout.write("\n")
            return 0
        logger.debug(f"Running {command.manifest.subcommand}")
        result = command.run(logger)
        if not command.raw_output:
            document = {"manifest": command.manifest, "result": result}
            json.dump(to_jsonable(document), sys.stdout, indent=2)
            sys.stdout.write("\n")
        return 0
    except HerdwatchError as e:
        logger.error(str(e))
        return e.exit_code
    except (OSError, UnicodeDecodeError) as e:
        logger.error(str(e))
        return MalformedInputError.exit_code
    finally:
        logger.close()


if __name__ == "__main__":
    sys.exit(main())
