"""Compression, checkpoint-size and device-memory budget arithmetic"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from herdwatch.common.enumerations import UnitMode
from herdwatch.common.errors import MalformedInputError

_PREFIXES = ("", "K", "M", "G", "T")


@dataclass
class ComponentSpec:
    """
    A model component whose weights are stored on disk

    :param name: component name
    :param parameter_count: number of parameters, positive
    :param bytes_per_parameter: 2 for half16, 4 for single32
    :param activation_budget_bytes: optional caller-supplied activation memory
    """

    name: str
    parameter_count: int
    bytes_per_parameter: float = 2.0
    activation_budget_bytes: Optional[int] = None

    def __post_init__(self) -> None:
        if self.parameter_count <= 0:
            raise MalformedInputError(
                f"{self.name}: parameter_count must be positive, got {self.parameter_count}"
            )
        if self.bytes_per_parameter <= 0:
            raise MalformedInputError(
                f"{self.name}: bytes_per_parameter must be positive, got {self.bytes_per_parameter}"
            )


@dataclass
class BudgetLine:
    name: str
    vram_gb: float
    note: str = ""

    def __post_init__(self) -> None:
        if not self.vram_gb >= 0:
            raise MalformedInputError(f"{self.name}: vram_gb must be >= 0, got {self.vram_gb}")


@dataclass
class BudgetReport:
    """
    :param total_gb: sum of the line sizes
    :param headroom_gb: envelope minus total, negative when over budget
    """

    lines: List[BudgetLine]
    total_gb: float
    envelope_gb: float
    headroom_gb: float
    over_budget: bool = False
    unit_mode: UnitMode = UnitMode.DECIMAL


def compression_ratio(teacher_params: float, student_params: float) -> float:
    if student_params <= 0:
        raise MalformedInputError(f"Student parameter count must be positive, got {student_params}")
    return teacher_params / student_params


def checkpoint_size(component: ComponentSpec) -> int:
    """On-disk weight size in bytes: parameter_count x bytes_per_parameter"""
    return int(round(component.parameter_count * component.bytes_per_parameter))


def budget_report(
    lines: Sequence[BudgetLine],
    envelope_gb: float,
    unit_mode: Union[str, UnitMode] = UnitMode.DECIMAL,
) -> BudgetReport:
    """
    Sum the budget lines against a device envelope.

    :param lines: budgeted items, sizes in GB of `unit_mode`
    :param envelope_gb: device memory envelope, positive
    :param unit_mode: unit convention the line sizes are expressed in
    """
    if envelope_gb <= 0:
        raise MalformedInputError(f"envelope_gb must be positive, got {envelope_gb}")
    total = math.fsum(line.vram_gb for line in lines)
    headroom = envelope_gb - total
    return BudgetReport(
        lines=list(lines),
        total_gb=total,
        envelope_gb=envelope_gb,
        headroom_gb=headroom,
        over_budget=headroom < 0,
        unit_mode=UnitMode(unit_mode),
    )


def budget_from_dict(data: Dict[str, Any]) -> Tuple[List[BudgetLine], float]:
    """Parse `{"envelope_gb": 16, "lines": [{"name", "vram_gb", "note"}, ...]}`"""
    try:
        envelope = float(data["envelope_gb"])
        lines = [
            BudgetLine(
                name=str(item["name"]),
                vram_gb=float(item["vram_gb"]),
                note=str(item.get("note", "")),
            )
            for item in data.get("lines", [])
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedInputError(f"Invalid budget document: {e}") from e
    return lines, envelope


def format_table(report: BudgetReport) -> str:
    """Aligned text rendering of a budget report"""
    unit = "GB" if report.unit_mode == UnitMode.DECIMAL else "GiB"
    width = max([len(line.name) for line in report.lines] + [len("Remaining headroom")])
    rows = [f"{'Component':<{width}}  {unit:>8}  Note"]
    for line in report.lines:
        rows.append(f"{line.name:<{width}}  {line.vram_gb:>8.2f}  {line.note}")
    rows.append(f"{'Total budgeted':<{width}}  {report.total_gb:>8.2f}")
    rows.append(f"{'Envelope':<{width}}  {report.envelope_gb:>8.2f}")
    rows.append(
        f"{'Remaining headroom':<{width}}  {report.headroom_gb:>8.2f}"
        + ("  OVER BUDGET" if report.over_budget else "")
    )
    return "\n".join(rows)


def relative_change(baseline: float, candidate: float) -> Tuple[float, float]:
    """
    :return: (baseline / candidate fold reduction, percent change from baseline)
    """
    if baseline == 0 or candidate == 0:
        raise MalformedInputError("Relative change needs non-zero baseline and candidate")
    return baseline / candidate, 100.0 * (candidate - baseline) / baseline


def implied_bytes_per_parameter(size_bytes: float, parameter_count: int) -> float:
    """Bytes per parameter implied by a reported file size"""
    if parameter_count <= 0:
        raise MalformedInputError("parameter_count must be positive")
    return size_bytes / parameter_count


def format_size(
    nbytes: float, unit_mode: Union[str, UnitMode] = UnitMode.DECIMAL, prefix: str = "G"
) -> Tuple[float, str]:
    """
    Express a byte count in a decimal (GB, 1e9) or binary (GiB, 2**30) unit.

    :param nbytes: size in bytes
    :param unit_mode: decimal or binary
    :param prefix: one of "", "K", "M", "G", "T"
    :return: (value, unit label)
    """
    if prefix not in _PREFIXES:
        raise MalformedInputError(f"Unknown size prefix '{prefix}'")
    power = _PREFIXES.index(prefix)
    if UnitMode(unit_mode) == UnitMode.DECIMAL:
        return nbytes / 1000 ** power, f"{prefix}B"
    label = f"{prefix}iB" if prefix else "B"
    return nbytes / 1024 ** power, label
