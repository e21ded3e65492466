"""Student-versus-teacher feature diagnostics"""

from typing import Tuple

import torch as T

from herdwatch.common.errors import DegenerateInputError
from herdwatch.common.type_aliases import FidelityReport, Tensor
from herdwatch.distillation.losses import check_pair, location_cosines, moment_stats
from herdwatch.settings import LossSettings


def fidelity(
    student: Tensor, teacher: Tensor, settings: LossSettings = LossSettings()
) -> FidelityReport:
    """
    Cosine, scale and error diagnostics of a student feature tensor against its teacher.

    :param student: student features (B, C, H, W)
    :param teacher: teacher features, same dims
    :param settings: `settings.eps` clamps zero channel-vector norms
    :return: the fidelity report; zero teacher std raises DegenerateInputError
    """
    student, teacher = check_pair(student, teacher)
    teacher_std = teacher.std(unbiased=False)
    if teacher_std == 0:
        raise DegenerateInputError("Teacher features have zero standard deviation")

    cosines = location_cosines(student, teacher, settings.eps)
    mu_s, sigma_s = moment_stats(student)
    mu_t, sigma_t = moment_stats(teacher)
    return FidelityReport(
        cosine_mean=float(cosines.mean()),
        cosine_std=float(cosines.std(unbiased=False)),
        scale_ratio=float(student.std(unbiased=False) / teacher_std),
        mse=float(T.mean((student - teacher) ** 2)),
        channel_mean_abs_diff=float(T.mean(T.abs(mu_s - mu_t))),
        channel_std_abs_diff=float(T.mean(T.abs(sigma_s - sigma_t))),
    )


def fidelity_band(
    report: FidelityReport,
    min_cosine: float = 0.7,
    ratio_band: Tuple[float, float] = (0.8, 1.2),
) -> bool:
    """Whether a report falls in the acceptable band: cosine >= min_cosine and ratio in band"""
    low, high = ratio_band
    return report.cosine_mean >= min_cosine and low <= report.scale_ratio <= high
