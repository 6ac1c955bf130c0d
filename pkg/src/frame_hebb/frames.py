"""Frame machinery on vectorized symmetric matrices.

For zero-mean Gaussian input x with covariance Sigma, the centered Hebbian
direction xi = vec(x x^T) - vec(Sigma) has second-moment operator
S = E[xi xi^T] = (Sigma kron Sigma)(I + T), where T is the commutation
matrix. S kills vec(Skew) and is positive definite on V = vec(Sym), where
it acts as the sandwich M -> Sigma M Sigma doubled; its inverse on V is
therefore the closed form v -> vec(Sigma^-1 unvec(v) Sigma^-1 / 2). That
makes xi a frame for V: every symmetric-vec v expands as
v = E[(v, S^-1 xi) xi], and for v = vec(Sigma (I - W^T W) Sigma) the
coefficient (v, S^-1 xi) is exactly the error-gated rule's global gain,
which is how that rule drops out of the subspace rule.

Everything here is materialized densely; the operator lives on vectors of
length nx**2 and nx stays small.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, SkewDomainError
from .gaussian import SampleBatch
from .linalg import (
    CovarianceModel,
    commutation_matrix,
    kron,
    skew_part,
    sym_part,
    unvec,
    vec,
)
from .records import ExperimentRecord, digest_inputs, make_record
from .rules import as_weights, eghr_g_values, eghr_update_from_g, oja_update_closed

SKEW_DOMAIN_RTOL = 1e-10
CHAIN_AGREEMENT_RTOL = 1e-12
MC_TARGET_RTOL = 5e-2

_CHUNK = 250_000


@dataclass(frozen=True)
class FrameVector:
    """xi = vec(x x^T) - vec(Sigma) for one sample x."""

    xi: np.ndarray
    source_x: np.ndarray
    covariance: CovarianceModel


@dataclass(frozen=True)
class FrameOperator:
    """Dense second-moment operator of xi with its building blocks cached."""

    s: np.ndarray
    sigma_kron: np.ndarray
    commutation: np.ndarray


def frame_vector(x, cov: CovarianceModel) -> FrameVector:
    x = np.asarray(x, dtype=float)
    if x.shape != (cov.dim,):
        raise DimensionError(f"x has shape {x.shape}, expected ({cov.dim},)")
    xi = vec(np.outer(x, x) - cov.sigma)
    return FrameVector(xi=xi, source_x=x, covariance=cov)


def _centered_rows(x: np.ndarray, cov: CovarianceModel) -> np.ndarray:
    """Rows vec(x_k x_k^T) - vec(Sigma) for a block of samples."""
    n, d = x.shape
    outer = np.einsum("ki,kj->kji", x, x).reshape(n, d * d)
    return outer - vec(cov.sigma)


def frame_operator_analytic(cov: CovarianceModel) -> FrameOperator:
    """S = (Sigma kron Sigma)(I + T), symmetrized to the bit."""
    sk = kron(cov.sigma, cov.sigma)
    t = commutation_matrix(cov.dim)
    s = sk + sk @ t
    return FrameOperator(s=(s + s.T) / 2.0, sigma_kron=sk, commutation=t)


def frame_operator_empirical(batch: SampleBatch) -> FrameOperator:
    """(1/n) sum_k xi_k xi_k^T, accumulated in fixed-size chunks so the
    result is independent of available memory."""
    if batch.n < 2:
        raise ValueError(f"need n >= 2 samples, got {batch.n}")
    cov = batch.covariance
    d = cov.dim
    s = np.zeros((d * d, d * d))
    for start in range(0, batch.n, _CHUNK):
        rows = _centered_rows(batch.data[start : start + _CHUNK], cov)
        s += rows.T @ rows
    s /= batch.n
    return FrameOperator(
        s=(s + s.T) / 2.0,
        sigma_kron=kron(cov.sigma, cov.sigma),
        commutation=commutation_matrix(d),
    )


@dataclass(frozen=True)
class FrameBounds:
    """Two-sided bounds of (v, S v) on unit v in vec(Sym).

    ``lower`` and ``upper_tight`` are the extreme eigenvalues of S restricted
    to vec(Sym), 2 lambda_min(Sigma)^2 and 2 lambda_max(Sigma)^2.
    ``upper_trace`` is the cruder Cauchy-Schwarz constant
    E|xi|^2 = tr S = (tr Sigma)^2 + tr(Sigma^2).
    """

    lower: float
    upper_tight: float
    upper_trace: float


def frame_bounds(cov: CovarianceModel) -> FrameBounds:
    lam = cov.eigvals
    trace_sq = float(np.trace(cov.sigma)) ** 2
    sq_trace = float(np.sum(cov.sigma * cov.sigma))
    return FrameBounds(
        lower=float(2.0 * lam[-1] ** 2),
        upper_tight=float(2.0 * lam[0] ** 2),
        upper_trace=trace_sq + sq_trace,
    )


def _symmetric_domain(v: np.ndarray, cov: CovarianceModel, what: str) -> np.ndarray:
    """Check v is a symmetric-matrix vectorization; return it symmetrized.

    Tolerates skew Frobenius norm up to 1e-10 * (1 + |v|); beyond that the
    operator is being applied off its domain and we refuse.
    """
    v = np.asarray(v, dtype=float)
    m = unvec(v, cov.dim)
    skew_norm = float(np.linalg.norm(skew_part(m)))
    limit = SKEW_DOMAIN_RTOL * (1.0 + float(np.linalg.norm(v)))
    if skew_norm > limit:
        raise SkewDomainError(
            f"{what}: skew component has norm {skew_norm:.3e}, above the "
            f"domain tolerance {limit:.3e}; the operator is singular off "
            "the symmetric subspace"
        )
    return sym_part(m)


def restricted_inverse_apply(cov: CovarianceModel, v) -> np.ndarray:
    """Apply the inverse of S restricted to vec(Sym):
    v -> vec(Sigma^-1 unvec(v) Sigma^-1 / 2).

    Exact closed form (no dense pseudo-inverse); input must be a
    symmetric-matrix vectorization within tolerance.
    """
    m = _symmetric_domain(v, cov, "restricted_inverse_apply")
    return vec(0.5 * (cov.sigma_inv @ m @ cov.sigma_inv))


def frame_coefficient(v, x, cov: CovarianceModel) -> float:
    """Expansion coefficient (v, S^-1 xi(x)) for v in vec(Sym).

    Equals 0.5 * (unvec(v), Sigma^-1 x x^T Sigma^-1 - Sigma^-1)_F.
    """
    m = _symmetric_domain(np.asarray(v, dtype=float), cov, "frame_coefficient")
    xi = frame_vector(x, cov).xi
    return float(vec(m) @ restricted_inverse_apply(cov, xi))


def cancellation_coefficient(w, x, cov: CovarianceModel) -> float:
    """The same coefficient for v = vec(Sigma (I - W^T W) Sigma), written
    S-free: since v = S vec((I - W^T W)/2) and S is self-adjoint,
    (v, S^-1 xi) collapses to (vec((I - W^T W)/2), xi)."""
    w = as_weights(w)
    if w.shape[1] != cov.dim:
        raise DimensionError(
            f"cancellation_coefficient: weights have nx={w.shape[1]}, "
            f"covariance has nx={cov.dim}"
        )
    half_residual = 0.5 * (np.eye(cov.dim) - w.T @ w)
    return float(vec(half_residual) @ frame_vector(x, cov).xi)


def _expansion_sums(v, batch: SampleBatch) -> tuple[np.ndarray, float]:
    """Chunked (1/n) sum_k (v, S^-1 xi_k) xi_k and the coefficient mean.

    Coefficients are evaluated sample-parallel as (S^-1 v, xi_k), which
    equals (v, S^-1 xi_k) because the restricted inverse is self-adjoint.
    """
    cov = batch.covariance
    dual = restricted_inverse_apply(cov, v)
    recon = np.zeros(cov.dim * cov.dim)
    coeff_total = 0.0
    for start in range(0, batch.n, _CHUNK):
        rows = _centered_rows(batch.data[start : start + _CHUNK], cov)
        coeffs = rows @ dual
        recon += rows.T @ coeffs
        coeff_total += float(np.sum(coeffs))
    return recon / batch.n, coeff_total / batch.n


def frame_expansion_reconstruct(v, batch: SampleBatch) -> np.ndarray:
    """Monte-Carlo frame expansion (1/n) sum_k (v, S^-1 xi_k) xi_k.

    Converges to v at the usual 1/sqrt(n) rate for v in vec(Sym).
    """
    v = np.asarray(v, dtype=float)
    recon, _ = _expansion_sums(v, batch)
    return recon


@dataclass(frozen=True)
class DerivationResult:
    """Numerical walk through the chain that turns the subspace rule into
    the error-gated rule, with one residual record per claim."""

    target: np.ndarray  # W Sigma (I - W^T W) Sigma, closed form
    reconstruction: np.ndarray  # frame expansion of vec(Sigma (I - W^T W) Sigma)
    frame_route: np.ndarray  # W applied through the expansion
    direct_route: np.ndarray  # gain-weighted Hebbian mean on the same batch
    records: tuple[ExperimentRecord, ...]


def derive_eghr_from_oja(w, cov: CovarianceModel, batch: SampleBatch) -> DerivationResult:
    """Regenerate the error-gated update from the subspace rule on a batch.

    Steps: right-multiply the closed-form subspace update by Sigma; frame-
    expand the symmetric sandwich v = vec(Sigma (I - W^T W) Sigma) over the
    batch; reattach W, restoring the mean term the expansion centered away;
    and compare against the gain-weighted Hebbian mean computed directly
    from the samples. The two routes are the same sum term by term (the
    coefficient equals the gain), so they must agree to roundoff on any
    batch, while either route approaches the closed-form target only at
    Monte-Carlo rate.
    """
    t0 = time.perf_counter()
    w = as_weights(w)
    target = oja_update_closed(w, cov) @ cov.sigma

    v = vec(cov.sigma @ (np.eye(cov.dim) - w.T @ w) @ cov.sigma)
    recon, coeff_mean = _expansion_sums(v, batch)
    # Undo the centering of xi: (1/n) sum c_k vec(x x^T) = recon + mean(c) vec(Sigma).
    frame_route = w @ (unvec(recon, cov.dim) + coeff_mean * cov.sigma)

    direct_route = eghr_update_from_g(
        w, batch, eghr_g_values(w, batch, cov)
    )

    wall = (time.perf_counter() - t0) * 1e3
    digest = digest_inputs(
        nx=cov.dim, nu=w.shape[0], n=batch.n, seed=batch.seed, check="derivation"
    )
    agreement = make_record(
        check_name="derivation-chain-agreement",
        value=float(np.linalg.norm(frame_route - direct_route)),
        reference=0.0,
        tolerance=CHAIN_AGREEMENT_RTOL * max(float(np.linalg.norm(direct_route)), 1e-300),
        metric="abs",
        seed=batch.seed,
        inputs_digest=digest,
        wall_time_ms=wall,
    )
    mc = make_record(
        check_name="derivation-mc-target",
        value=float(np.linalg.norm(frame_route - target)),
        reference=0.0,
        tolerance=MC_TARGET_RTOL * max(float(np.linalg.norm(target)), 1e-300),
        metric="abs",
        seed=batch.seed,
        inputs_digest=digest,
        wall_time_ms=wall,
    )
    return DerivationResult(
        target=target,
        reconstruction=recon,
        frame_route=frame_route,
        direct_route=direct_route,
        records=(agreement, mc),
    )
