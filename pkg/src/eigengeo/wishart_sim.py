"""Monte-Carlo harnesses: Wishart sampling, estimator risks, bias checks.

Sampling is reproducible by construction: every replication draws from its
own counter-based Philox substream keyed by (seed, stream name, replication
index), so serial runs, threaded runs, and re-runs all see identical
numbers.  Grid points of an experiment reuse the same replication streams,
which acts as common random numbers across the grid and sharpens the
comparisons the experiments exist to make.

Risks are Kullback-Leibler losses of diagonal covariance estimates against
the diagonal matrix of population eigenvalues; estimate vectors from
``lbar``/``lambda_star`` are descending while frame-diagonal estimates stay
in frame order (they pair coordinate-wise with the population eigenvalues).
"""

from __future__ import annotations

import concurrent.futures
import os
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import EigengeoError
from .estimators import (
    GAMMA_FRAME,
    LBAR,
    STAR,
    OrthogonalEnsemble,
    default_ensemble,
    lambda_star_from_eigs,
    o2_equidistant,
)
from .spd_manifold import GAP_TOLERANCE_REL, SpdMatrix, as_spd


def worker_count() -> int:
    """Worker cap for grid-level parallelism (EIGENGEO_THREADS, else cores)."""
    env = os.environ.get("EIGENGEO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def replication_rng(seed: int, stream: str, rep: int) -> np.random.Generator:
    """Generator for one replication of one named stream.

    Philox keyed by (seed, crc32(stream), rep): counter-based and splittable,
    so any replication can be regenerated in isolation and parallel runs are
    bitwise identical to serial ones.
    """
    key = np.array(
        [
            np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
            (np.uint64(zlib.crc32(stream.encode())) << np.uint64(32))
            ^ np.uint64(rep),
        ],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


def sample_product_sum(Sigma, n: int, rng: np.random.Generator) -> SpdMatrix:
    """Sum of n outer products of independent zero-mean Gaussian draws with
    covariance Sigma (factored once, lower-triangular)."""
    Sigma = as_spd(Sigma)
    if n < Sigma.dim:
        raise ValueError(f"need n >= p for an a.s. SPD sample, got n={n}, p={Sigma.dim}")
    A = np.linalg.cholesky(Sigma.matrix)
    x = rng.standard_normal((n, Sigma.dim)) @ A.T
    return SpdMatrix(x.T @ x)


def _normal_batch(p: int, n: int, reps: int, seed: int, stream: str) -> np.ndarray:
    """Standard-normal draws, one (n, p) block per replication substream."""
    z = np.empty((reps, n, p))
    for r in range(reps):
        z[r] = replication_rng(seed, stream, r).standard_normal((n, p))
    return z


def _color_batch(z: np.ndarray, Sigma_matrix: np.ndarray) -> np.ndarray:
    """Product-sum matrices from standard-normal blocks, colored by Sigma."""
    A = np.linalg.cholesky(Sigma_matrix)
    x = z @ A.T
    return np.einsum("rni,rnj->rij", x, x)


def _sample_batch(Sigma_matrix: np.ndarray, n: int, reps: int, seed: int, stream: str) -> np.ndarray:
    """Stack of product-sum matrices, one per replication substream."""
    p = Sigma_matrix.shape[0]
    return _color_batch(_normal_batch(p, n, reps, seed, stream), Sigma_matrix)


def kl_loss_diag(estimate: np.ndarray, eigenvalues: np.ndarray) -> np.ndarray:
    """KL loss of diag(estimate) against diag(eigenvalues), rows batched."""
    est = np.atleast_2d(np.asarray(estimate, dtype=float))
    lam = np.asarray(eigenvalues, dtype=float)
    ratio = est / lam
    loss = ratio.sum(axis=1) - np.log(ratio).sum(axis=1) - lam.size
    return loss if np.asarray(estimate).ndim == 2 else loss[0]


@dataclass(frozen=True)
class RiskResult:
    """Monte-Carlo risk summary for one estimator at one grid point."""

    mean: float
    stderr: float
    reps: int
    failures: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs of one Monte-Carlo experiment.

    ``grid`` holds the scenario parameter (eigenvalue ratio c, or frame
    angle theta); ``methods`` the estimator tags; the ensemble fields apply
    only when the frame-averaged estimator participates.
    """

    p: int
    n: int
    reps: int
    seed: int
    grid: tuple[float, ...]
    methods: tuple[str, ...]
    ensemble_size: int = 50
    experiment: str = "custom"

    def __post_init__(self):
        if self.n < self.p:
            raise ValueError(f"need n >= p, got n={self.n}, p={self.p}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if len(self.grid) == 0:
            raise ValueError("grid must be nonempty")


@dataclass(frozen=True)
class RiskReport:
    """Per-grid-point risks for each estimator, plus the paired difference
    between the first two estimators (same draws, so the difference is
    estimated far more precisely than the individual risks)."""

    experiment: str
    param_name: str
    param_values: np.ndarray
    methods: tuple[str, ...]
    risks: dict
    diff: list | None
    config: ExperimentConfig


def figure4_config(reps: int = 10_000, seed: int = 0, paper_scale: bool = False) -> ExperimentConfig:
    """Risk of scaled sample eigenvalues vs. the identity-frame diagonal as
    the eigenvalue ratio c walks from 1.00 down to 0.02 in steps of 0.02."""
    grid = tuple(np.round(np.arange(50, 0, -1) * 0.02, 10))
    return ExperimentConfig(
        p=2,
        n=10,
        reps=100_000 if paper_scale else reps,
        seed=seed,
        grid=grid,
        methods=(LBAR, GAMMA_FRAME),
        experiment="fig4",
    )


def figure5_config(reps: int = 10_000, seed: int = 0, paper_scale: bool = False) -> ExperimentConfig:
    """Same estimator pair at fixed eigenvalues (1, 0.8) while the true
    frame rotates by theta in [0, pi/2] (26 equidistant angles)."""
    grid = tuple(np.arange(26) * (np.pi / 50.0))
    return ExperimentConfig(
        p=2,
        n=10,
        reps=100_000 if paper_scale else reps,
        seed=seed,
        grid=grid,
        methods=(LBAR, GAMMA_FRAME),
        experiment="fig5",
    )


def figure6_config(
    reps: int = 1_000, seed: int = 0, ensemble_size: int = 50, paper_scale: bool = False
) -> ExperimentConfig:
    """Scaled sample eigenvalues vs. the frame-averaged shrinkage estimator
    over c from 0.04 to 1.00 in steps of 0.04."""
    grid = tuple(np.round(np.arange(1, 26) * 0.04, 10))
    return ExperimentConfig(
        p=2,
        n=10,
        reps=10_000 if paper_scale else reps,
        seed=seed,
        grid=grid,
        methods=(LBAR, STAR),
        ensemble_size=ensemble_size,
        experiment="fig6",
    )


def _batch_lbar(S_batch: np.ndarray, n: int):
    vals = np.linalg.eigvalsh(S_batch)[:, ::-1] / n
    return vals, np.ones(S_batch.shape[0], dtype=bool)


def _batch_gamma_frame(gamma: np.ndarray):
    def run(S_batch: np.ndarray, n: int):
        vals = np.einsum("ij,rik,kj->rj", gamma, S_batch, gamma) / n
        return vals, np.ones(S_batch.shape[0], dtype=bool)

    return run


def _batch_star(ensemble: OrthogonalEnsemble):
    def run(S_batch: np.ndarray, n: int):
        eigs = np.linalg.eigvalsh(S_batch)[:, ::-1]
        gaps = eigs[:, :-1] - eigs[:, 1:]
        valid = (eigs[:, -1] > 0.0) & np.all(
            gaps >= GAP_TOLERANCE_REL * eigs[:, :1], axis=1
        )
        vals = np.full_like(eigs, np.nan)
        if valid.any():
            vals[valid] = lambda_star_from_eigs(
                eigs[valid], n, ensemble, check_gaps=False
            )
        return vals, valid

    return run


def _method_runner(tag: str, cfg: ExperimentConfig):
    if tag == LBAR:
        return _batch_lbar
    if tag == GAMMA_FRAME:
        return _batch_gamma_frame(np.eye(cfg.p))
    if tag == STAR:
        ensemble = (
            o2_equidistant(cfg.ensemble_size)
            if cfg.p == 2
            else default_ensemble(cfg.p, rng=cfg.seed)
        )
        return _batch_star(ensemble)
    raise ValueError(f"unknown estimator tag {tag!r}")


def _summarize(losses: np.ndarray, valid: np.ndarray, reps: int) -> RiskResult:
    kept = losses[valid]
    count = int(valid.sum())
    mean = float(kept.mean()) if count else float("nan")
    stderr = float(kept.std(ddof=1) / np.sqrt(count)) if count > 1 else float("nan")
    return RiskResult(mean, stderr, count, reps - count)


def _risk_point(cfg: ExperimentConfig, z: np.ndarray, sigma: np.ndarray, target: np.ndarray, runners) -> tuple:
    S_batch = _color_batch(z, sigma)
    losses = {}
    valids = {}
    for tag, runner in runners:
        vals, valid = runner(S_batch, cfg.n)
        with np.errstate(invalid="ignore"):
            losses[tag] = kl_loss_diag(vals, target)
        valids[tag] = valid
    results = {
        tag: _summarize(losses[tag], valids[tag], cfg.reps) for tag, _ in runners
    }
    diff = None
    if len(runners) >= 2:
        t1, t2 = runners[0][0], runners[1][0]
        both = valids[t1] & valids[t2]
        diff = _summarize(losses[t1] - losses[t2], both, cfg.reps)
    return results, diff


def _parallel_points(fn, count: int):
    workers = min(worker_count(), count)
    if workers <= 1:
        return [fn(i) for i in range(count)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _run_risk_experiment(cfg: ExperimentConfig, sigma_of, target_of, param_name: str) -> RiskReport:
    runners = [(tag, _method_runner(tag, cfg)) for tag in cfg.methods]
    # Every grid point reuses the same replication substreams (common random
    # numbers): draw the standard-normal blocks once and recolor per point.
    z = _normal_batch(cfg.p, cfg.n, cfg.reps, cfg.seed, cfg.experiment)

    def at(i: int):
        value = cfg.grid[i]
        return _risk_point(cfg, z, sigma_of(value), target_of(value), runners)

    outcomes = _parallel_points(at, len(cfg.grid))
    risks = {tag: [res[tag] for res, _ in outcomes] for tag in cfg.methods}
    diffs = [d for _, d in outcomes]
    return RiskReport(
        experiment=cfg.experiment,
        param_name=param_name,
        param_values=np.array(cfg.grid),
        methods=cfg.methods,
        risks=risks,
        diff=diffs if all(d is not None for d in diffs) else None,
        config=cfg,
    )


def figure4_experiment(cfg: ExperimentConfig | None = None) -> RiskReport:
    cfg = cfg or figure4_config()
    return _run_risk_experiment(
        cfg,
        sigma_of=lambda c: np.diag([1.0, c]),
        target_of=lambda c: np.array([1.0, c]),
        param_name="c",
    )


def figure5_experiment(cfg: ExperimentConfig | None = None) -> RiskReport:
    cfg = cfg or figure5_config()
    lam = np.array([1.0, 0.8])

    def sigma_of(theta: float) -> np.ndarray:
        R = _rotation(theta)
        return (R * lam) @ R.T

    return _run_risk_experiment(
        cfg, sigma_of=sigma_of, target_of=lambda theta: lam, param_name="theta"
    )


def figure6_experiment(cfg: ExperimentConfig | None = None) -> RiskReport:
    cfg = cfg or figure6_config()
    return _run_risk_experiment(
        cfg,
        sigma_of=lambda c: np.diag([1.0, c]),
        target_of=lambda c: np.array([1.0, c]),
        param_name="c",
    )


def kl_risk(estimator, Sigma, n: int, reps: int, seed: int, stream: str = "kl-risk") -> RiskResult:
    """Monte-Carlo KL risk of a per-matrix estimator callable.

    ``estimator(S, n)`` must return an estimate vector (or an object with a
    ``values`` attribute) ordered against the descending population
    eigenvalues.  Domain errors raised by the estimator on individual
    replications are counted as failures and excluded, never hidden.
    """
    Sigma = as_spd(Sigma)
    target = np.linalg.eigvalsh(Sigma.matrix)[::-1]
    losses = np.empty(reps)
    valid = np.zeros(reps, dtype=bool)
    for r in range(reps):
        rng = replication_rng(seed, stream, r)
        S = sample_product_sum(Sigma, n, rng)
        try:
            est = estimator(S, n)
        except EigengeoError:
            continue
        vals = np.asarray(getattr(est, "values", est), dtype=float)
        losses[r] = kl_loss_diag(vals, target)
        valid[r] = True
    if not valid.any():
        raise EigengeoError("every replication failed")
    return _summarize(losses, valid, reps)


@dataclass(frozen=True)
class MajorizationReport:
    """Partial-sum comparison of mean scaled sample eigenvalues against the
    population eigenvalues, with Monte-Carlo bands."""

    eigenvalues: np.ndarray
    mean_partial_sums: np.ndarray
    target_partial_sums: np.ndarray
    margins: np.ndarray
    stderrs: np.ndarray
    holds_3sigma: np.ndarray
    trace_max_rel_dev: float
    reps: int


def bias_majorization_check(Sigma, n: int, reps: int, seed: int) -> MajorizationReport:
    """Verify that mean scaled sample eigenvalues majorize the population
    eigenvalues: every proper partial sum exceeds its target (3-sigma bands)
    while the full sum matches the trace exactly draw by draw."""
    Sigma = as_spd(Sigma)
    lam = np.linalg.eigvalsh(Sigma.matrix)[::-1]
    S_batch = _sample_batch(Sigma.matrix, n, reps, seed, "bias")
    lbars = np.linalg.eigvalsh(S_batch)[:, ::-1] / n
    traces = np.trace(S_batch, axis1=1, axis2=2) / n
    trace_dev = np.abs(lbars.sum(axis=1) - traces) / traces
    partial = np.cumsum(lbars, axis=1)
    mean_partial = partial.mean(axis=0)
    stderrs = partial.std(axis=0, ddof=1) / np.sqrt(reps)
    target_partial = np.cumsum(lam)
    margins = mean_partial - target_partial
    holds = np.empty(lam.size, dtype=bool)
    holds[:-1] = margins[:-1] > 3.0 * stderrs[:-1]
    holds[-1] = abs(margins[-1]) < 3.0 * stderrs[-1] + 1e-9
    return MajorizationReport(
        eigenvalues=lam,
        mean_partial_sums=mean_partial,
        target_partial_sums=target_partial,
        margins=margins,
        stderrs=stderrs,
        holds_3sigma=holds,
        trace_max_rel_dev=float(trace_dev.max()),
        reps=reps,
    )
