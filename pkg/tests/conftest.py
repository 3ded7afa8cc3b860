import numpy as np
import pytest

from eigengeo import SpdMatrix, Spectrum


def random_spd(rng, p, ridge=None):
    """Random SPD matrix with comfortably separated eigenvalues."""
    A = rng.standard_normal((p, p))
    return SpdMatrix(A @ A.T + (ridge if ridge is not None else p) * np.eye(p))


def random_orthogonal(rng, p):
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    return q * np.sign(np.diag(r))


def random_spectrum(rng, p, low=0.5, high=5.0, min_gap_frac=0.05):
    """Random spectrum whose gaps are far from the degeneracy tolerance."""
    while True:
        lam = np.sort(rng.uniform(low, high, p))[::-1]
        gaps = lam[:-1] - lam[1:]
        if p == 1 or gaps.min() >= min_gap_frac * lam[0]:
            break
    return Spectrum(lam, random_orthogonal(rng, p))


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
