import csv
import os
from enum import Enum
from typing import List, Optional, Tuple, Union

import matplotlib as mpl
import matplotlib.pyplot as plt
import numpy as np
from tensorboard.backend.event_processing import event_accumulator

from herdwatch.common.enumerations import UnitMode
from herdwatch.common.errors import MalformedInputError
from herdwatch.memory.budget import format_size


class Metric(Enum):
    """
    Enum for the scalar series written to tensorboard.
    """

    SESSION_BYTES = "memory"
    SIM_SELF = "sim_self"
    SIM_OTHER = "sim_other"


def read_tensorboard_data(path: str, metric: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    Reads a scalar series from tensorboard data.

    :param path: path to the tensorboard data
    :param metric: the metric to read
    :return: steps and values
    """
    metric = Metric(metric.lower())
    if metric == Metric.SESSION_BYTES:
        tag = "Memory/session_bytes"
    elif metric == Metric.SIM_SELF:
        tag = "Reid/sim_self"
    elif metric == Metric.SIM_OTHER:
        tag = "Reid/sim_other"

    ea = event_accumulator.EventAccumulator(
        path, size_guidance={event_accumulator.SCALARS: 0}
    )
    ea.Reload()
    events = ea.Scalars(tag)
    return (
        np.array([event.step for event in events]),
        np.array([event.value for event in events]),
    )


def read_trace_csv(path: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    Reads a `frame,bytes` memory trace written by `prune-sim --format csv`.

    :param path: path to the CSV trace
    :return: frames and byte counts
    """
    frames, sizes = [], []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["frame", "bytes"]:
            raise MalformedInputError(f"{path} line 1: expected header frame,bytes")
        for row in reader:
            try:
                frames.append(int(row[0]))
                sizes.append(int(row[1]))
            except (IndexError, ValueError) as e:
                raise MalformedInputError(f"{path} line {reader.line_num}: {e}") from e
    return np.array(frames), np.array(sizes)


def get_file_name(path: str) -> str:
    """
    Gets the file name from the given path.
    :param path: the path to the file
    """
    return os.path.basename(os.path.normpath(path)).split(".")[0]


def plot_memory(
    paths: List[str],
    legend: Optional[List[str]] = None,
    budget_bytes: Optional[float] = None,
    unit_mode: Union[str, UnitMode] = UnitMode.DECIMAL,
    title: str = "Session memory",
    log_y: bool = False,
    save_types: List[str] = ["pdf"],
    save_path: Optional[str] = os.path.join(os.getcwd(), "plots/memory"),
    show: bool = False,
) -> mpl.figure.Figure:
    """
    Plots one or more session memory traces against frames.

    :param paths: CSV traces or tensorboard log directories
    :param legend: the legend to use, defaults to the file names
    :param budget_bytes: optional device budget drawn as a horizontal line
    :param unit_mode: decimal (GB) or binary (GiB) y axis
    :param title: the plot title
    :param log_y: whether to log the y axis
    :param save_types: the save types
    :param save_path: where to save the plot, nothing is saved if None
    :param show: whether to open a window
    """
    fig, ax = plt.subplots(figsize=(8, 5))
    names = [get_file_name(path) for path in paths]
    cmap = plt.get_cmap("tab10" if len(paths) <= 10 else "rainbow")
    colors = (
        cmap(range(len(paths)))
        if isinstance(cmap, mpl.colors.ListedColormap)
        else list(cmap(np.linspace(0, 1, len(paths))))
    )
    _, unit = format_size(0, unit_mode)

    for i, (path, name, color) in enumerate(zip(paths, names, colors)):
        if os.path.isdir(path):
            frames, sizes = read_tensorboard_data(path, Metric.SESSION_BYTES.value)
        else:
            frames, sizes = read_trace_csv(path)
        values = np.array([format_size(s, unit_mode)[0] for s in sizes])
        label = name if legend is None else legend[i]
        ax.plot(frames, values, label=label, color=color, lw=2)

    if budget_bytes is not None:
        ax.axhline(
            format_size(budget_bytes, unit_mode)[0], color="k", ls="--", lw=1, label="budget"
        )

    # Finalize the figure.
    ax.locator_params(axis="x", nbins=6)
    ax.xaxis.grid(linewidth=0.5, alpha=0.5)
    ax.yaxis.grid(linewidth=0.5)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.tick_params(axis="both", which="both", length=0)
    ax.set_title(title)
    ax.set_xlabel("Frame")
    ax.set_ylabel(f"Memory ({unit})")
    ax.legend()
    if log_y:
        ax.set_yscale("log")

    if save_path:
        directory = os.path.dirname(save_path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        for save_type in save_types:
            fig.savefig(f"{save_path}.{save_type}", bbox_inches="tight")

    if show:
        plt.show()
    return fig


if __name__ == "__main__":
    from argparse import ArgumentParser

    parser = ArgumentParser()
    parser.add_argument("-p", "--paths", nargs="+", type=str, required=True)
    parser.add_argument("--legend", nargs="+", type=str)
    parser.add_argument("--budget-gb", type=float)
    parser.add_argument("--unit-mode", type=str, default="decimal")
    parser.add_argument("--title", type=str, default="Session memory")
    parser.add_argument("--log-y", action="store_true")
    parser.add_argument("--save-types", nargs="+", type=str, default=["pdf"])
    parser.add_argument(
        "--save-path", type=str, default=os.path.join(os.getcwd(), "plots/memory")
    )

    args = parser.parse_args()

    plot_memory(
        args.paths,
        args.legend,
        args.budget_gb * 1e9 if args.budget_gb is not None else None,
        args.unit_mode,
        args.title,
        args.log_y,
        args.save_types,
        args.save_path,
        show=True,
    )
