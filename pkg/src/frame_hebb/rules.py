"""Both principal-subspace learning rules, as closed-form expected updates
and as empirical batch updates, plus an explicit-Euler trainer and the
subspace-quality metrics used to judge convergence.

The subspace rule is dW/dt = E[u (x - W^T u)^T] with u = W x, whose closed
form under covariance Sigma is W Sigma (I - W^T W). The error-gated rule is
dW/dt = E[g(x, u) u x^T] with the global gain
g = 0.5 (|x|^2 - |u|^2 - E[|x|^2 - |u|^2]); its closed form is
W Sigma (I - W^T W) Sigma, i.e. the subspace rule right-multiplied by Sigma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DivergenceError, RankDeficientError
from .gaussian import SampleBatch, derive_seed, sample
from .linalg import CovarianceModel

DIVERGENCE_NORM = 1e6

RULES = ("oja", "eghr")
MODES = ("closed", "empirical")


@dataclass(frozen=True)
class WeightMatrix:
    """Trainable nu-by-nx weight matrix; nu <= nx (dimensionality reduction)."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 2:
            raise DimensionError(f"weights must be 2-dimensional, got shape {w.shape}")
        nu, nx = w.shape
        if nu < 1 or nx < 1 or nu > nx:
            raise DimensionError(f"need 1 <= nu <= nx, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights contain non-finite entries")
        object.__setattr__(self, "w", w)

    @property
    def nu(self) -> int:
        return self.w.shape[0]

    @property
    def nx(self) -> int:
        return self.w.shape[1]


def as_weights(w) -> np.ndarray:
    """Accept a WeightMatrix or a raw array; return the validated array."""
    if isinstance(w, WeightMatrix):
        return w.w
    return WeightMatrix(w=w).w


def _check_dims(w: np.ndarray, nx: int, what: str) -> None:
    if w.shape[1] != nx:
        raise DimensionError(f"{what}: weights have nx={w.shape[1]}, input has nx={nx}")


def oja_update_closed(w, cov: CovarianceModel) -> np.ndarray:
    """Closed-form expected update W Sigma (I - W^T W)."""
    w = as_weights(w)
    _check_dims(w, cov.dim, "oja_update_closed")
    return (w @ cov.sigma) @ (np.eye(cov.dim) - w.T @ w)


def oja_update_empirical(w, batch: SampleBatch) -> np.ndarray:
    """Batch average of u (x - W^T u)^T with u = W x."""
    w = as_weights(w)
    _check_dims(w, batch.dim, "oja_update_empirical")
    x = batch.data
    u = x @ w.T
    return u.T @ (x - u @ w) / batch.n


def eghr_g(x, w, cov: CovarianceModel) -> float:
    """Global gain 0.5 (|x|^2 - |u|^2 - E[|x|^2 - |u|^2]) with the
    expectation in closed form: E|x|^2 = tr Sigma, E|u|^2 = tr(W Sigma W^T)."""
    w = as_weights(w)
    x = np.asarray(x, dtype=float)
    if x.shape != (cov.dim,):
        raise DimensionError(f"x has shape {x.shape}, expected ({cov.dim},)")
    _check_dims(w, cov.dim, "eghr_g")
    u = w @ x
    expected = np.trace(cov.sigma) - float(np.sum((w @ cov.sigma) * w))
    return 0.5 * (float(x @ x) - float(u @ u) - expected)


def eghr_g_empirical(x, w, batch_means: tuple[float, float]) -> float:
    """Gain with the expectation replaced by batch means (m_xsq, m_usq)."""
    w = as_weights(w)
    x = np.asarray(x, dtype=float)
    m_xsq, m_usq = batch_means
    u = w @ x
    return 0.5 * (float(x @ x) - float(u @ u) - m_xsq + m_usq)


def batch_norm_means(w, batch: SampleBatch) -> tuple[float, float]:
    """Batch means of |x|^2 and |u|^2 used by the empirical gain."""
    w = as_weights(w)
    _check_dims(w, batch.dim, "batch_norm_means")
    x = batch.data
    u = x @ w.T
    return float(np.mean(np.sum(x * x, axis=1))), float(np.mean(np.sum(u * u, axis=1)))


def eghr_g_values(w, batch: SampleBatch, cov: CovarianceModel | None = None) -> np.ndarray:
    """Per-sample gains over a batch.

    Batch-mean centering when ``cov`` is None (the default used by the
    empirical update; the values then sum to zero up to roundoff), closed-form
    centering via ``cov`` otherwise.
    """
    w = as_weights(w)
    _check_dims(w, batch.dim, "eghr_g_values")
    x = batch.data
    u = x @ w.T
    s = np.sum(x * x, axis=1) - np.sum(u * u, axis=1)
    if cov is None:
        center = float(np.mean(s))
    else:
        center = np.trace(cov.sigma) - float(np.sum((w @ cov.sigma) * w))
    return 0.5 * (s - center)


def eghr_update_closed(w, cov: CovarianceModel) -> np.ndarray:
    """Closed-form expected update W Sigma (I - W^T W) Sigma.

    Evaluated sandwich-first, W @ [Sigma (I - W^T W) Sigma], keeping this an
    arithmetic path independent of oja_update_closed(...) @ Sigma.
    """
    w = as_weights(w)
    _check_dims(w, cov.dim, "eghr_update_closed")
    sandwich = cov.sigma @ (np.eye(cov.dim) - w.T @ w) @ cov.sigma
    return w @ sandwich


def eghr_update_from_g(w, batch: SampleBatch, g: np.ndarray) -> np.ndarray:
    """Gain-weighted Hebbian mean (1/n) sum_k g_k u_k x_k^T for explicit g."""
    w = as_weights(w)
    _check_dims(w, batch.dim, "eghr_update_from_g")
    g = np.asarray(g, dtype=float)
    if g.shape != (batch.n,):
        raise DimensionError(f"g has shape {g.shape}, expected ({batch.n},)")
    x = batch.data
    u = x @ w.T
    return (u * g[:, None]).T @ x / batch.n


def eghr_update_empirical(
    w, batch: SampleBatch, g_mode: str = "batch"
) -> np.ndarray:
    """Batch average of g u x^T; the gain is centered by the batch mean
    (``g_mode="batch"``, default) or by the closed-form expectation
    (``g_mode="closed"``)."""
    if g_mode not in ("batch", "closed"):
        raise ValueError(f"unknown g_mode {g_mode!r}")
    cov = batch.covariance if g_mode == "closed" else None
    g = eghr_g_values(w, batch, cov)
    return eghr_update_from_g(w, batch, g)


def orthonormality_residual(w) -> float:
    """Frobenius distance of W W^T from the identity."""
    w = as_weights(w)
    return float(np.linalg.norm(w @ w.T - np.eye(w.shape[0])))


def subspace_error(w, cov: CovarianceModel) -> float:
    """Frobenius distance between the row-space projector of W and the
    projector onto the principal nu-dimensional eigenspace of Sigma.

    Zero iff the subspaces coincide; invariant to invertible row mixing.
    Raises RankDeficientError when the rows of W are dependent, since the
    row space then has dimension below nu and the metric is undefined.
    """
    w = as_weights(w)
    _check_dims(w, cov.dim, "subspace_error")
    nu, nx = w.shape
    _, s, vh = np.linalg.svd(w, full_matrices=False)
    tol = s[0] * max(nu, nx) * np.finfo(float).eps if s[0] > 0 else 0.0
    if s[-1] <= tol:
        raise RankDeficientError(
            f"weight rows are rank deficient (singular values {s})"
        )
    p_w = vh.T @ vh
    e = cov.top_eigvecs(nu)
    p_k = e @ e.T
    return float(np.linalg.norm(p_w - p_k))


@dataclass(frozen=True)
class TrainerConfig:
    learning_rate: float
    steps: int
    batch_size: int = 0  # 0 means closed-form mode
    record_every: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if self.batch_size < 0:
            raise ValueError(f"batch_size must be >= 0, got {self.batch_size}")


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    w: np.ndarray
    subspace_error: float
    orthonormality_residual: float
    update_norm: float


@dataclass(frozen=True)
class Trajectory:
    rule: str
    mode: str
    points: tuple[TrajectoryPoint, ...]

    @property
    def final(self) -> TrajectoryPoint:
        return self.points[-1]


def train(
    rule: str, mode: str, w0, cov: CovarianceModel, config: TrainerConfig
) -> Trajectory:
    """Explicit-Euler integration of the chosen rule from W0.

    Closed-form mode steps along the exact expected update; empirical mode
    draws a fresh batch per step with a seed derived from (config.seed, step),
    so identical configs give identical trajectories. Records metrics every
    ``record_every`` steps and always at the final step. Aborts with
    DivergenceError if the weight norm passes 1e6.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "empirical" and config.batch_size < 1:
        raise ValueError("empirical mode needs batch_size >= 1")

    w = as_weights(w0).copy()

    def update_at(w: np.ndarray, step: int) -> np.ndarray:
        if mode == "closed":
            if rule == "oja":
                return oja_update_closed(w, cov)
            return eghr_update_closed(w, cov)
        batch = sample(cov, config.batch_size, derive_seed(config.seed, step))
        if rule == "oja":
            return oja_update_empirical(w, batch)
        return eghr_update_empirical(w, batch)

    points: list[TrajectoryPoint] = []
    for step in range(config.steps + 1):
        upd = update_at(w, step)
        if step % config.record_every == 0 or step == config.steps:
            points.append(
                TrajectoryPoint(
                    step=step,
                    w=w.copy(),
                    subspace_error=subspace_error(w, cov),
                    orthonormality_residual=orthonormality_residual(w),
                    update_norm=float(np.linalg.norm(upd)),
                )
            )
        if step == config.steps:
            break
        w = w + config.learning_rate * upd
        norm = float(np.linalg.norm(w))
        if norm > DIVERGENCE_NORM:
            raise DivergenceError(step + 1, norm)
    return Trajectory(rule=rule, mode=mode, points=tuple(points))


def fixed_point_weights(cov: CovarianceModel, nu: int, seed: int | None = None) -> np.ndarray:
    """A stable fixed point of both rules: an orthonormal basis of the
    principal nu-subspace, optionally rotated by a random orthogonal mix."""
    e = cov.top_eigvecs(nu)
    if seed is None:
        return e.T.copy()
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((nu, nu)))
    return q @ e.T
