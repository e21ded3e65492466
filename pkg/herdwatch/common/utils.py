import dataclasses
import hashlib
import math
import random
from enum import Enum
from typing import Any, Tuple, Union

import numpy as np
import torch as T

from herdwatch.common.logging_ import Logger
from herdwatch.settings import LoggerSettings


def to_torch(*data) -> Union[Tuple[T.Tensor], T.Tensor]:
    """Convert to float64 torch tensors"""
    result = [None] * len(data)
    for i, el in enumerate(data):
        if isinstance(el, np.ndarray):
            result[i] = T.from_numpy(np.asarray(el, dtype=np.float64))
        else:
            result[i] = T.as_tensor(el, dtype=T.float64)

    if len(data) == 1:
        return result[0]
    else:
        return tuple(result)


def to_numpy(*data) -> Union[Tuple[np.ndarray], np.ndarray]:
    """Convert to numpy arrays"""
    result = [None] * len(data)
    for i, el in enumerate(data):
        if isinstance(el, T.Tensor):
            result[i] = el.detach().cpu().numpy()
        else:
            result[i] = np.asarray(el)

    if len(data) == 1:
        return result[0]
    else:
        return tuple(result)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox-4x64 generator, the documented stream of every simulation"""
    return np.random.Generator(np.random.Philox(seed))


def set_seed(seed: int) -> np.random.Generator:
    """
    Seed python, torch and numpy, and return a counter-based Philox generator
    so simulations draw from a reproducible, documented stream.

    :param seed: unsigned 64-bit seed
    :return: numpy Generator backed by Philox-4x64
    """
    random.seed(seed)
    T.manual_seed(seed % 2 ** 63)
    np.random.seed(seed % 2 ** 32)
    return make_rng(seed)


def build_logger(logger_settings: LoggerSettings = LoggerSettings()) -> Logger:
    return Logger(
        tensorboard_log_path=logger_settings.tensorboard_log_path,
        file_handler_level=logger_settings.file_handler_level,
        stream_handler_level=logger_settings.stream_handler_level,
        verbose=logger_settings.verbose,
        log_path=logger_settings.log_path,
    )


def file_digest(path: str) -> str:
    """SHA-256 hex digest of a file"""
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            sha.update(chunk)
    return sha.hexdigest()


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses, enums, numpy and torch values to JSON types"""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, T.Tensor):
        return obj.detach().cpu().tolist()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        # undefined ratios (e.g. MOTP without matches) become null
        return None if math.isnan(obj) else float(obj)
    return obj
