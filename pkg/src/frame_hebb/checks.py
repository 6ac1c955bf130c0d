"""Named, seeded verification checks.

Each check distills one identity or convergence claim into a single
ExperimentRecord: worst observed violation vs a pinned tolerance. Exact
identities use roundoff-level tolerances; Monte-Carlo comparisons use either
4-standard-error bands or the fitted 1/sqrt(n) rate, never a fixed constant
that sampling noise could cross.
"""

from __future__ import annotations

import time

import numpy as np

from .config import CHECK_GROUPS, RunConfig
from .frames import (
    cancellation_coefficient,
    derive_eghr_from_oja,
    frame_bounds,
    frame_coefficient,
    frame_expansion_reconstruct,
    frame_operator_analytic,
    frame_operator_empirical,
    restricted_inverse_apply,
)
from .gaussian import (
    builtin_test_functions,
    derive_seed,
    isserlis_fourth_moment,
    sample,
    stein_check,
)
from .linalg import build_covariance, random_spd, skew_part, sym_part, vec
from .records import ExperimentRecord, digest_inputs, make_record
from .rules import (
    eghr_g,
    eghr_update_closed,
    eghr_update_empirical,
    oja_update_closed,
    oja_update_empirical,
)

# Eigenvalue range for the random covariances drawn inside sweep checks.
SWEEP_EIG_RANGE = (0.5, 2.0)

EXACT_RTOL = 1e-12
BOUND_ATOL = 1e-10
RESTRICTED_INVERSE_RTOL = 1e-10
MC_FROBENIUS_RTOL = 5e-2
SLOPE_REFERENCE = -0.5
SLOPE_HALF_WIDTH = 0.15
RATE_SAMPLE_GRID = (10**3, 10**4, 10**5, 10**6)


def dim_sweep(max_nx: int = 8, min_nx: int = 2, seed: int = 0) -> list[tuple[int, int]]:
    """(nx, nu) pairs cycling nx through [min_nx, max_nx] with random nu <= nx."""
    rng = np.random.default_rng(seed)
    return [
        (nx, int(rng.integers(1, nx + 1)))
        for nx in range(min_nx, max_nx + 1)
    ]


def _random_pair(rng, nx: int, nu: int):
    """One random (covariance, weights) pair for identity sweeps."""
    sigma = random_spd(nx, SWEEP_EIG_RANGE, seed=int(rng.integers(2**63)))
    cov = build_covariance(sigma)
    w = rng.uniform(-1.0, 1.0, size=(nu, nx))
    return cov, w


def closed_equivalence_check(
    seed: int, dims: list[tuple[int, int]], trials: int = 1000
) -> ExperimentRecord:
    """Worst relative gap between the closed-form error-gated update and the
    Sigma-postmultiplied subspace update over random (W, Sigma) pairs."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(trials):
        nx, nu = dims[k % len(dims)]
        cov, w = _random_pair(rng, nx, nu)
        lhs = eghr_update_closed(w, cov)
        rhs = oja_update_closed(w, cov) @ cov.sigma
        ref = float(np.linalg.norm(rhs))
        err = float(np.linalg.norm(lhs - rhs))
        worst = max(worst, err / ref if ref > 0 else err)
    return make_record(
        check_name="closed-equivalence",
        value=worst,
        reference=0.0,
        tolerance=EXACT_RTOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest_inputs(dims=dims, trials=trials, seed=seed),
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


def fixed_point_sharing_check(
    seed: int, nx: int = 5, nu: int = 2, trials: int = 50
) -> ExperimentRecord:
    """Both rules vanish at constructed fixed points (orthonormally mixed
    eigenvector subsets), and near fixed points the update norms stay inside
    the eigenvalue sandwich |oja| * lambda_min <= |eghr| <= |oja| * lambda_max
    that forces either rule to vanish exactly when the other does."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        sigma = random_spd(nx, SWEEP_EIG_RANGE, seed=int(rng.integers(2**63)))
        cov = build_covariance(sigma)
        pick = rng.choice(nx, size=nu, replace=False)
        q, _ = np.linalg.qr(rng.standard_normal((nu, nu)))
        w_fp = q @ cov.eigvecs[:, pick].T
        sigma_scale = float(np.linalg.norm(cov.sigma))

        oja_norm = float(np.linalg.norm(oja_update_closed(w_fp, cov)))
        eghr_norm = float(np.linalg.norm(eghr_update_closed(w_fp, cov)))
        worst = max(worst, oja_norm / sigma_scale, eghr_norm / sigma_scale**2)

        w_near = w_fp + 1e-6 * rng.standard_normal((nu, nx))
        oja_n = float(np.linalg.norm(oja_update_closed(w_near, cov)))
        eghr_n = float(np.linalg.norm(eghr_update_closed(w_near, cov)))
        lam_min, lam_max = cov.eigvals[-1], cov.eigvals[0]
        sandwich = max(lam_min * oja_n - eghr_n, eghr_n - lam_max * oja_n, 0.0)
        worst = max(worst, sandwich / (lam_max * oja_n) if oja_n > 0 else sandwich)
    return make_record(
        check_name="fixed-point-sharing",
        value=worst,
        reference=0.0,
        tolerance=EXACT_RTOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest_inputs(nx=nx, nu=nu, trials=trials, seed=seed),
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


def stein_identity_check(
    seed: int, n: int, dims: tuple[int, ...] = (1, 2, 4)
) -> ExperimentRecord:
    """Integration-by-parts identity for every built-in test function on a
    random SPD covariance per dimension; value is the worst ratio of observed
    discrepancy to its 4-standard-error band (must stay below 1)."""
    t0 = time.perf_counter()
    worst = 0.0
    counter = 0
    for dim in dims:
        cov = build_covariance(random_spd(dim, SWEEP_EIG_RANGE, seed=derive_seed(seed, dim)))
        for fn in builtin_test_functions(dim):
            rec = stein_check(cov, fn, n, derive_seed(seed, 1000 + counter))
            counter += 1
            worst = max(worst, rec.value / rec.tolerance)
    return make_record(
        check_name="stein-identity",
        value=worst,
        reference=0.0,
        tolerance=1.0,
        metric="abs",
        seed=seed,
        inputs_digest=digest_inputs(dims=dims, n=n, seed=seed),
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


def frame_bounds_check(cov, seed: int, trials: int = 1000) -> ExperimentRecord:
    """Two-sided frame condition on random unit vectors in vec(Sym), plus the
    ordering of the tight spectral bound below the trace bound."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    s = frame_operator_analytic(cov).s
    b = frame_bounds(cov)
    worst = max(0.0, b.upper_tight - b.upper_trace)
    for _ in range(trials):
        v = vec(sym_part(rng.standard_normal((cov.dim, cov.dim))))
        v /= np.linalg.norm(v)
        quad = float(v @ s @ v)
        worst = max(worst, b.lower - quad, quad - b.upper_tight)
    return make_record(
        check_name="frame-bounds",
        value=worst,
        reference=0.0,
        tolerance=BOUND_ATOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest_inputs(nx=cov.dim, trials=trials, seed=seed),
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


def kernel_annihilation_check(cov, seed: int, trials: int = 100) -> ExperimentRecord:
    """The analytic operator kills vectorized skew matrices: worst of
    |S vec(K)| / (|S| |K|) over random skew K."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    s = frame_operator_analytic(cov).s
    s_scale = float(np.linalg.norm(s))
    worst = 0.0
    if cov.dim > 1:  # the skew part of a scalar is identically zero
        for _ in range(trials):
            k = skew_part(rng.standard_normal((cov.dim, cov.dim)))
            ratio = float(np.linalg.norm(s @ vec(k))) / (
                s_scale * float(np.linalg.norm(k))
            )
            worst = max(worst, ratio)
    return make_record(
        check_name="kernel-annihilation",
        value=worst,
        reference=0.0,
        tolerance=EXACT_RTOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest_inputs(nx=cov.dim, trials=trials, seed=seed),
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


def restricted_inverse_check(cov, seed: int, trials: int = 100) -> ExperimentRecord:
    """S (S^-1 v) = v on vec(Sym): worst relative residual over random
    symmetric directions."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    s = frame_operator_analytic(cov).s
    worst = 0.0
    for _ in range(trials):
        v = vec(sym_part(rng.standard_normal((cov.dim, cov.dim))))
        resid = float(np.linalg.norm(s @ restricted_inverse_apply(cov, v) - v))
        worst = max(worst, resid / float(np.linalg.norm(v)))
    return make_record(
        check_name="restricted-inverse",
        value=worst,
        reference=0.0,
        tolerance=RESTRICTED_INVERSE_RTOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest_inputs(nx=cov.dim, trials=trials, seed=seed),
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


def coefficient_identity_checks(
    seed: int, dims: list[tuple[int, int]], trials: int = 1000
) -> tuple[ExperimentRecord, ExperimentRecord]:
    """Over random (W, Sigma, x) triples: the frame coefficient of
    vec(Sigma (I - W^T W) Sigma) equals the error-gated gain, and the S-free
    cancellation form equals the frame coefficient.

    Errors are normalized by the largest gain magnitude over the triple set;
    the gain crosses zero on individual triples, so a per-triple denominator
    would measure cancellation, not implementation error.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    coeff_err = 0.0
    cancel_err = 0.0
    scale = 0.0
    for k in range(trials):
        nx, nu = dims[k % len(dims)]
        cov, w = _random_pair(rng, nx, nu)
        x = sample(cov, 1, int(rng.integers(2**63))).data[0]
        g = eghr_g(x, w, cov)
        v = vec(cov.sigma @ (np.eye(nx) - w.T @ w) @ cov.sigma)
        c = frame_coefficient(v, x, cov)
        cc = cancellation_coefficient(w, x, cov)
        coeff_err = max(coeff_err, abs(c - g))
        cancel_err = max(cancel_err, abs(cc - c))
        scale = max(scale, abs(g))
    wall = (time.perf_counter() - t0) * 1e3
    digest = digest_inputs(dims=dims, trials=trials, seed=seed)
    coeff = make_record(
        check_name="coefficient-identity",
        value=coeff_err / scale,
        reference=0.0,
        tolerance=EXACT_RTOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest,
        wall_time_ms=wall,
    )
    cancel = make_record(
        check_name="cancellation-identity",
        value=cancel_err / scale,
        reference=0.0,
        tolerance=EXACT_RTOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest,
        wall_time_ms=wall,
    )
    return coeff, cancel


def isserlis_checks(
    cov, seed: int, n: int
) -> tuple[ExperimentRecord, ExperimentRecord]:
    """The analytic fourth moment minus its rank-one mean term must equal the
    analytic frame operator to roundoff, and the empirical operator must land
    within 5% relative Frobenius error at large n."""
    t0 = time.perf_counter()
    s = frame_operator_analytic(cov).s
    s_scale = float(np.linalg.norm(s))
    m4 = isserlis_fourth_moment(cov)
    vs = vec(cov.sigma)
    analytic_gap = float(np.linalg.norm(m4 - np.outer(vs, vs) - s)) / s_scale
    digest = digest_inputs(nx=cov.dim, n=n, seed=seed)
    analytic = make_record(
        check_name="isserlis-analytic",
        value=analytic_gap,
        reference=0.0,
        tolerance=EXACT_RTOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )
    s_emp = frame_operator_empirical(sample(cov, n, seed)).s
    empirical = make_record(
        check_name="isserlis-empirical",
        value=float(np.linalg.norm(s_emp - s)) / s_scale,
        reference=0.0,
        tolerance=MC_FROBENIUS_RTOL,
        metric="abs",
        seed=seed,
        inputs_digest=digest,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )
    return analytic, empirical


_RATE_KINDS = ("oja", "eghr", "frame-operator", "frame-expansion")


def mc_rate_check(
    kind: str,
    cov,
    nu: int,
    seed: int,
    ns: tuple[int, ...] = RATE_SAMPLE_GRID,
    replicates: int = 3,
) -> ExperimentRecord:
    """Fit the log-log slope of empirical-vs-closed-form error against sample
    count; a healthy Monte-Carlo estimator sits near -1/2."""
    if kind not in _RATE_KINDS:
        raise ValueError(f"unknown rate kind {kind!r}; expected one of {_RATE_KINDS}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1.0, 1.0, size=(nu, cov.dim))
    if kind == "oja":
        ref = oja_update_closed(w, cov)
        est = lambda batch: oja_update_empirical(w, batch)
    elif kind == "eghr":
        ref = eghr_update_closed(w, cov)
        est = lambda batch: eghr_update_empirical(w, batch)
    elif kind == "frame-operator":
        ref = frame_operator_analytic(cov).s
        est = lambda batch: frame_operator_empirical(batch).s
    else:
        v = vec(cov.sigma @ (np.eye(cov.dim) - w.T @ w) @ cov.sigma)
        ref = v
        est = lambda batch: frame_expansion_reconstruct(v, batch)

    rmse = []
    counter = 0
    for n in ns:
        sq = 0.0
        for _ in range(replicates):
            batch = sample(cov, n, derive_seed(seed, counter))
            counter += 1
            sq += float(np.linalg.norm(est(batch) - ref)) ** 2
        rmse.append(np.sqrt(sq / replicates))
    slope = float(np.polyfit(np.log10(ns), np.log10(rmse), 1)[0])
    return make_record(
        check_name=f"mc-rate-{kind}",
        value=slope,
        reference=SLOPE_REFERENCE,
        tolerance=SLOPE_HALF_WIDTH,
        metric="abs",
        seed=seed,
        inputs_digest=digest_inputs(kind=kind, nx=cov.dim, nu=nu, ns=ns, seed=seed),
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
    )


def derivation_checks(cov, nu: int, seed: int, n: int) -> tuple[ExperimentRecord, ...]:
    """Run the full numerical derivation chain on one random weight matrix."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1.0, 1.0, size=(nu, cov.dim))
    batch = sample(cov, n, derive_seed(seed, 7))
    return derive_eghr_from_oja(w, cov, batch).records


# ---------------------------------------------------------------------------
# Registry: check name -> runner producing (possibly several) records.

def _runner_closed_equivalence(config: RunConfig):
    return [closed_equivalence_check(config.seed, dims=[(config.nx, config.nu)])]


def _runner_fixed_point(config: RunConfig):
    return [fixed_point_sharing_check(config.seed, nx=config.nx, nu=config.nu)]


def _runner_stein(config: RunConfig):
    return [stein_identity_check(config.seed, n=min(config.n_samples, 10**5))]


def _runner_mc(kind):
    def run(config: RunConfig):
        cov = build_covariance(config.build_sigma())
        return [mc_rate_check(kind, cov, config.nu, config.seed)]

    return run


def _runner_frame_bounds(config: RunConfig):
    return [frame_bounds_check(build_covariance(config.build_sigma()), config.seed)]


def _runner_kernel(config: RunConfig):
    return [kernel_annihilation_check(build_covariance(config.build_sigma()), config.seed)]


def _runner_rinv(config: RunConfig):
    return [restricted_inverse_check(build_covariance(config.build_sigma()), config.seed)]


def _runner_coeff(config: RunConfig):
    return list(
        coefficient_identity_checks(config.seed, dims=[(config.nx, config.nu)])
    )


def _runner_isserlis(config: RunConfig):
    cov = build_covariance(config.build_sigma())
    return list(isserlis_checks(cov, config.seed, config.n_samples))


def _runner_derivation(config: RunConfig):
    cov = build_covariance(config.build_sigma())
    return list(derivation_checks(cov, config.nu, config.seed, config.n_samples))


_RUNNER_BY_CHECK = {
    "closed-equivalence": _runner_closed_equivalence,
    "fixed-point-sharing": _runner_fixed_point,
    "stein-identity": _runner_stein,
    "mc-rate-oja": _runner_mc("oja"),
    "mc-rate-eghr": _runner_mc("eghr"),
    "frame-bounds": _runner_frame_bounds,
    "kernel-annihilation": _runner_kernel,
    "restricted-inverse": _runner_rinv,
    "coefficient-identity": _runner_coeff,
    "cancellation-identity": _runner_coeff,
    "isserlis-analytic": _runner_isserlis,
    "isserlis-empirical": _runner_isserlis,
    "mc-rate-frame-operator": _runner_mc("frame-operator"),
    "mc-rate-frame-expansion": _runner_mc("frame-expansion"),
    "derivation-chain-agreement": _runner_derivation,
    "derivation-mc-target": _runner_derivation,
}


def run_checks(config: RunConfig, names: list[str]) -> list[ExperimentRecord]:
    """Run the runners behind the requested check names (each runner once),
    keep only the requested records, and stamp report groups."""
    seen = []
    for name in names:
        runner = _RUNNER_BY_CHECK[name]
        if runner not in seen:
            seen.append(runner)
    records = []
    for runner in seen:
        records.extend(runner(config))
    records = [r for r in records if r.check_name in names]
    for r in records:
        r.group = CHECK_GROUPS[r.check_name]
    return records
