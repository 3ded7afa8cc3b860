"""Eigenvalue estimators for a zero-mean Gaussian covariance.

Three estimators of the population eigenvalues from the product-sum matrix
S of n observations:

* ``lbar``: the scaled sample eigenvalues (the classical choice, biased
  apart when eigenvalues are close);
* ``lambda_hat``: the diagonal of S/n in a known eigenvector frame
  (unbiased when the frame is correct);
* ``lambda_star``: a frame-averaged shrinkage estimator that integrates
  the frame out against its plug-in posterior over the orthogonal group.

The group integrals are evaluated by quadrature over an
``OrthogonalEnsemble``: an equidistant rotation grid for p = 2 (exact for
trigonometric polynomials) or a Haar Monte-Carlo sample for p >= 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, QuadratureUnderflow
from .spd_manifold import ORTHOGONALITY_TOLERANCE, as_spd, check_eigenvalue_gaps

LBAR = "lbar"
GAMMA_FRAME = "gamma-frame"
STAR = "star"

EQUIDISTANT_O2 = "equidistant-o2"
HAAR_MC = "haar-mc"


@dataclass(frozen=True)
class EigenEstimate:
    """An eigenvalue estimate: positive values plus the producing method."""

    values: np.ndarray
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise DimensionMismatch("estimate must be a vector")
        if np.any(v <= 0.0):
            raise ValueError(f"estimate entries must be positive, got {v}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class OrthogonalEnsemble:
    """A weighted collection of orthogonal matrices used as quadrature nodes
    for integrals over the orthogonal group."""

    matrices: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        m = np.asarray(self.matrices, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise DimensionMismatch(f"expected (count, p, p) matrices, got {m.shape}")
        if w.shape != (m.shape[0],):
            raise DimensionMismatch("weights do not match the matrix count")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        total = w.sum()
        if not np.isclose(total, 1.0, rtol=0.0, atol=1e-9):
            raise ValueError(f"weights must sum to 1, got {total}")
        p = m.shape[1]
        eye = np.eye(p)
        for k in range(m.shape[0]):
            err = np.abs(m[k].T @ m[k] - eye).max()
            if err > ORTHOGONALITY_TOLERANCE:
                raise ValueError(f"member {k} is not orthogonal (deviation {err:.3e})")
        m.setflags(write=False)
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "matrices", m)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def size(self) -> int:
        return self.matrices.shape[0]


def o2_equidistant(count: int) -> OrthogonalEnsemble:
    """Equidistant rotation grid on [0, pi) with uniform weights.

    Rotation by theta + pi conjugates a matrix identically to rotation by
    theta, and reflections conjugate diagonal matrices identically to
    rotations, so a half-turn rotation grid represents all of O(2) for the
    integrands used here.  Equidistant nodes integrate trigonometric
    polynomials of low degree exactly.
    """
    if count < 2:
        raise ValueError(f"need at least 2 grid points, got {count}")
    thetas = np.arange(count) * np.pi / count
    mats = np.empty((count, 2, 2))
    mats[:, 0, 0] = np.cos(thetas)
    mats[:, 0, 1] = -np.sin(thetas)
    mats[:, 1, 0] = np.sin(thetas)
    mats[:, 1, 1] = np.cos(thetas)
    return OrthogonalEnsemble(mats, np.full(count, 1.0 / count), EQUIDISTANT_O2)


def haar_sample(p: int, count: int, rng) -> OrthogonalEnsemble:
    """Independent Haar-distributed orthogonal matrices with uniform weights.

    Each matrix is the Q factor of a standard Gaussian matrix with the signs
    of R's diagonal absorbed, which makes the distribution exactly Haar.
    ``rng`` is a seed or a numpy Generator.
    """
    if count < 1:
        raise ValueError(f"need at least 1 sample, got {count}")
    gen = np.random.default_rng(rng)
    mats = np.empty((count, p, p))
    for k in range(count):
        g = gen.standard_normal((p, p))
        q, r = np.linalg.qr(g)
        mats[k] = q * np.sign(np.diag(r))
    return OrthogonalEnsemble(mats, np.full(count, 1.0 / count), HAAR_MC)


def default_ensemble(p: int, rng=0, o2_count: int = 50, haar_count: int = 4096) -> OrthogonalEnsemble:
    """Ensemble policy: equidistant grid for p = 2, Haar sample for p >= 3."""
    if p == 2:
        return o2_equidistant(o2_count)
    return haar_sample(p, haar_count, rng)


def lbar(S, n: int) -> EigenEstimate:
    """Scaled sample eigenvalues: the spectrum of S/n, descending."""
    S = as_spd(S)
    if n < S.dim:
        raise ValueError(f"need n >= p, got n={n}, p={S.dim}")
    eigs = np.linalg.eigvalsh(S.matrix)[::-1] / n
    return EigenEstimate(eigs, LBAR)


def lambda_hat(S, n: int, gamma: np.ndarray) -> EigenEstimate:
    """Diagonal of S/n in the frame ``gamma``.

    Unbiased for the population eigenvalues when ``gamma`` is the true
    eigenvector matrix; with the sample eigenvector frame it reproduces
    ``lbar`` exactly.  Components keep the frame's index order.
    """
    S = as_spd(S)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (S.dim, S.dim):
        raise DimensionMismatch(
            f"frame shape {gamma.shape} does not match dim {S.dim}"
        )
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    vals = np.einsum("ij,ik,kj->j", gamma, S.matrix, gamma) / n
    return EigenEstimate(vals, GAMMA_FRAME)


def lambda_star(S, n: int, ensemble: OrthogonalEnsemble) -> EigenEstimate:
    """Frame-averaged shrinkage estimator.

    Averages the frame-diagonal of S/n over orthogonal frames weighted by
    exp(-(n/2) trace(L G^T L^-1 G)), the plug-in conditional density of the
    frame given the sample eigenvalues l (L = diag(l)).  Preserves the trace
    of S/n exactly and pulls the components toward their mean.
    """
    S = as_spd(S)
    if n < S.dim:
        raise ValueError(f"need n >= p, got n={n}, p={S.dim}")
    if ensemble.dim != S.dim:
        raise DimensionMismatch(
            f"ensemble dim {ensemble.dim} does not match matrix dim {S.dim}"
        )
    sample_eigs = np.linalg.eigvalsh(S.matrix)[::-1]
    values = lambda_star_from_eigs(sample_eigs, n, ensemble)
    return EigenEstimate(values, STAR, {"ensemble_kind": ensemble.kind, "ensemble_size": ensemble.size})


def lambda_star_from_eigs(
    sample_eigs, n: int, ensemble: OrthogonalEnsemble, check_gaps: bool = True
) -> np.ndarray:
    """Quadrature core of ``lambda_star`` operating on sample eigenvalues.

    ``sample_eigs`` are the eigenvalues of the product-sum matrix S (not yet
    divided by n), as a vector or a batch of row vectors.  All weights are
    combined in log scale with the maximum subtracted, so the group average
    stays finite even though the raw exponents scale like -n p / 2.
    """
    eigs = np.asarray(sample_eigs, dtype=float)
    single = eigs.ndim == 1
    batch = np.atleast_2d(eigs)
    if check_gaps:
        for row in batch:
            check_eigenvalue_gaps(row, "lambda_star")
    # W[k, j, i] = ensemble[k][j, i]^2 turns frame conjugations of diagonal
    # matrices into plain tensor contractions.
    W = ensemble.matrices**2
    lbar_rows = batch / n
    diag_proj = np.einsum("rj,kji->rki", lbar_rows, W)
    exponents = -0.5 * n * np.einsum("ri,kji,rj->rk", batch, W, 1.0 / batch)
    log_terms = np.log(ensemble.weights)[None, :] + exponents
    peak = log_terms.max(axis=1, keepdims=True)
    rel = np.exp(log_terms - peak)
    denom = rel.sum(axis=1)
    if not np.all(np.isfinite(denom)) or np.any(denom <= 0.0):
        raise QuadratureUnderflow("all quadrature weights underflowed")
    numer = np.einsum("rk,rki->ri", rel, diag_proj)
    result = numer / denom[:, None]
    return result[0] if single else result
