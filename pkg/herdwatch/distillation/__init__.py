from herdwatch.distillation.fidelity import fidelity, fidelity_band
from herdwatch.distillation.gradcheck import finite_difference_gradient, gradient_check
from herdwatch.distillation.losses import (
    compute_loss,
    horizontal_flip,
    loss_gradient,
    moment_stats,
)

__all__ = [
    "compute_loss",
    "loss_gradient",
    "horizontal_flip",
    "moment_stats",
    "fidelity",
    "fidelity_band",
    "finite_difference_gradient",
    "gradient_check",
]
