"""
Four-term feature distillation objective and its analytic gradient.

Feature tensors are (B, C, H, W) and all arithmetic is float64. The terms are
  - directional: MSE between per-sample L2-normalised student and teacher
  - cosine: mean over the B*H*W locations of 1 - cos(student C-vector, teacher C-vector)
  - moment: mean over (batch, channel) of (sigma_s - sigma_t)^2 + (mu_s - mu_t)^2,
    spatial statistics with the population convention
  - raw: plain MSE
"""

from typing import Optional, Tuple

import torch as T

from herdwatch.common.errors import DegenerateInputError, MalformedInputError
from herdwatch.common.type_aliases import LossBreakdown, Tensor
from herdwatch.common.utils import to_torch
from herdwatch.settings import LossSettings, LossWeights

DEFAULT_EPS = 1e-12


def as_feature_tensor(x: Tensor) -> T.Tensor:
    """Validate and convert a (B, C, H, W) feature tensor to float64"""
    x = to_torch(x)
    if x.ndim != 4 or min(x.shape) < 1:
        raise MalformedInputError(
            f"Feature tensors must be (B, C, H, W) with every dim >= 1, got {tuple(x.shape)}"
        )
    if not T.isfinite(x).all():
        raise MalformedInputError("Feature tensor contains non-finite values")
    return x


def check_pair(student: Tensor, teacher: Tensor) -> Tuple[T.Tensor, T.Tensor]:
    student = as_feature_tensor(student)
    teacher = as_feature_tensor(teacher)
    if student.shape != teacher.shape:
        raise MalformedInputError(
            f"Student dims {tuple(student.shape)} differ from teacher dims {tuple(teacher.shape)}"
        )
    return student, teacher


def _safe_norm(norm: T.Tensor, eps: Optional[float], what: str) -> T.Tensor:
    if eps is not None:
        return norm.clamp_min(eps)
    if (norm == 0).any():
        raise DegenerateInputError(f"Zero-norm {what}; use the epsilon mode to clamp norms")
    return norm


def sample_norms(x: T.Tensor, eps: Optional[float] = None) -> T.Tensor:
    """Per-sample L2 norm over (C, H, W), shaped (B, 1, 1, 1)"""
    norm = x.flatten(start_dim=1).norm(dim=1).view(-1, 1, 1, 1)
    return _safe_norm(norm, eps, "sample")


def location_vectors(x: T.Tensor) -> T.Tensor:
    """Reshape (B, C, H, W) to (B*H*W, C) rows of channel vectors"""
    return x.permute(0, 2, 3, 1).reshape(-1, x.shape[1])


def from_location_vectors(rows: T.Tensor, shape: T.Size) -> T.Tensor:
    b, c, h, w = shape
    return rows.reshape(b, h, w, c).permute(0, 3, 1, 2)


def location_cosines(
    student: T.Tensor, teacher: T.Tensor, eps: Optional[float] = None
) -> T.Tensor:
    """Cosine similarity of the student and teacher channel vector at each location"""
    s = location_vectors(student)
    t = location_vectors(teacher)
    s_norm = _safe_norm(s.norm(dim=1), eps, "student channel vector")
    t_norm = _safe_norm(t.norm(dim=1), eps, "teacher channel vector")
    return ((s * t).sum(dim=1) / (s_norm * t_norm)).clamp(-1.0, 1.0)


def moment_stats(x: T.Tensor) -> Tuple[T.Tensor, T.Tensor]:
    """Per (batch, channel) spatial mean and population std, each (B, C)"""
    return x.mean(dim=(2, 3)), x.std(dim=(2, 3), unbiased=False)


def horizontal_flip(x: Tensor) -> T.Tensor:
    """Mirror a (B, C, H, W) tensor along its width axis"""
    return T.flip(as_feature_tensor(x), dims=[3])


def compute_loss(
    student: Tensor,
    teacher: Tensor,
    weights: LossWeights = LossWeights(),
    settings: LossSettings = LossSettings(),
) -> LossBreakdown:
    """
    Evaluate the distillation objective.

    :param student: student features (B, C, H, W)
    :param teacher: teacher features, same dims
    :param weights: term weights
    :param settings: eps mode; by default zero norms raise DegenerateInputError
    :return: the four unweighted terms and the weighted total
    """
    student, teacher = check_pair(student, teacher)
    eps = settings.eps

    s_hat = student / sample_norms(student, eps)
    t_hat = teacher / sample_norms(teacher, eps)
    directional = T.mean((s_hat - t_hat) ** 2)

    cosine = T.mean(1.0 - location_cosines(student, teacher, eps))

    mu_s, sigma_s = moment_stats(student)
    mu_t, sigma_t = moment_stats(teacher)
    moment = T.mean((sigma_s - sigma_t) ** 2 + (mu_s - mu_t) ** 2)

    raw = T.mean((student - teacher) ** 2)

    terms = [float(v) for v in (directional, cosine, moment, raw)]
    total = (
        weights.w_dir * terms[0]
        + weights.w_cos * terms[1]
        + weights.w_moment * terms[2]
        + weights.w_raw * terms[3]
    )
    return LossBreakdown(*terms, total=total)


def loss_gradient(
    student: Tensor,
    teacher: Tensor,
    weights: LossWeights = LossWeights(),
    settings: LossSettings = LossSettings(),
) -> T.Tensor:
    """
    Analytic gradient of the weighted total with respect to every student element.

    :param student: student features (B, C, H, W)
    :param teacher: teacher features, same dims
    :param weights: term weights
    :param settings: eps mode, as for `compute_loss`
    :return: dTotal/dStudent with the student's dims
    """
    student, teacher = check_pair(student, teacher)
    eps = settings.eps
    b, c, h, w = student.shape
    n_elements = student.numel()

    # directional: d/ds |s/|s| - v|^2 through the normalisation Jacobian
    raw_norm = student.flatten(start_dim=1).norm(dim=1).view(-1, 1, 1, 1)
    s_norm = sample_norms(student, eps)
    u = student / s_norm
    v = teacher / sample_norms(teacher, eps)
    dot = (u * v).flatten(start_dim=1).sum(dim=1).view(-1, 1, 1, 1)
    grad_dir = T.where(
        raw_norm >= s_norm,
        (2.0 / n_elements) * (u * dot - v) / s_norm,
        # clamped norm is a constant, so the map is linear there
        (2.0 / n_elements) * (u - v) / s_norm,
    )

    # cosine: one row per spatial location
    s_rows = location_vectors(student)
    t_rows = location_vectors(teacher)
    s_row_norm = _safe_norm(s_rows.norm(dim=1), eps, "student channel vector")[:, None]
    t_row_norm = _safe_norm(t_rows.norm(dim=1), eps, "teacher channel vector")[:, None]
    t_unit = t_rows / t_row_norm
    cos = (s_rows * t_unit).sum(dim=1, keepdim=True) / s_row_norm
    n_locations = s_rows.shape[0]
    grad_cos_rows = -(t_unit / s_row_norm - cos * s_rows / s_row_norm ** 2) / n_locations
    grad_cos = from_location_vectors(grad_cos_rows, student.shape)

    # moment: population mean/std per (batch, channel)
    mu_s, sigma_s = moment_stats(student)
    mu_t, sigma_t = moment_stats(teacher)
    n_spatial = h * w
    n_stats = b * c
    sigma_safe = T.where(sigma_s > 0, sigma_s, T.ones_like(sigma_s))
    d_sigma = T.where(
        (sigma_s > 0)[..., None, None],
        (student - mu_s[..., None, None]) / (n_spatial * sigma_safe[..., None, None]),
        T.zeros_like(student),
    )
    grad_moment = (
        2.0 * (sigma_s - sigma_t)[..., None, None] * d_sigma
        + 2.0 * (mu_s - mu_t)[..., None, None] / n_spatial
    ) / n_stats

    grad_raw = 2.0 * (student - teacher) / n_elements

    return (
        weights.w_dir * grad_dir
        + weights.w_cos * grad_cos
        + weights.w_moment * grad_moment
        + weights.w_raw * grad_raw
    )
