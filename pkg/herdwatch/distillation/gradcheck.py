"""Finite-difference verification of the analytic distillation gradient"""

from typing import Callable

import torch as T

from herdwatch.common.type_aliases import Tensor
from herdwatch.distillation.losses import check_pair, compute_loss, loss_gradient
from herdwatch.settings import LossSettings, LossWeights


def finite_difference_gradient(
    fn: Callable[[T.Tensor], float], x: Tensor, step: float = 1e-5
) -> T.Tensor:
    """
    Central-difference gradient of a scalar function.
    Each element is perturbed by step * max(|x_i|, 1).

    :param fn: scalar function of a tensor
    :param x: evaluation point, left unchanged
    :param step: relative step size
    :return: numeric gradient with the dims of x
    """
    x = T.as_tensor(x, dtype=T.float64).clone()
    grad = T.zeros_like(x)
    flat = x.view(-1)
    flat_grad = grad.view(-1)
    for i in range(flat.numel()):
        original = flat[i].item()
        h = step * max(abs(original), 1.0)
        flat[i] = original + h
        f_plus = fn(x)
        flat[i] = original - h
        f_minus = fn(x)
        flat[i] = original
        flat_grad[i] = (f_plus - f_minus) / (2 * h)
    return grad


def gradient_check(
    student: Tensor,
    teacher: Tensor,
    weights: LossWeights = LossWeights(),
    settings: LossSettings = LossSettings(),
    step: float = 1e-5,
) -> float:
    """
    Compare `loss_gradient` with central finite differences of `compute_loss`.

    :return: max |analytic - numeric| / max(|analytic|_inf, |numeric|_inf), 0 if both vanish
    """
    student, teacher = check_pair(student, teacher)
    analytic = loss_gradient(student, teacher, weights, settings)
    numeric = finite_difference_gradient(
        lambda s: compute_loss(s, teacher, weights, settings).total, student, step
    )
    scale = max(analytic.abs().max().item(), numeric.abs().max().item())
    if scale == 0:
        return 0.0
    return (analytic - numeric).abs().max().item() / scale
