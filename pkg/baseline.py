"""
Batch-PCA als Orakel für kleine p

Bildet die empirische Kovarianz C = (1/n)·Σ x·xᵀ (O(p²) Speicher) und
bestimmt die Top-k-Eigenvektoren per klassischer orthogonaler Iteration
mit Rayleigh-Ritz-Schritt. Bewusst getrennt vom Streaming-Pfad.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

import config
from errors import OracleScaleError, RankDeficientError, ValidationError
from linalg import OrthonormalBasis, as_matrix, jacobi_eigh, qr_decompose, sample_gaussian_matrix, spectral_norm
from rng import role_rng
from stream import SampleStream, default_batch_size

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
MAX_ITERATIONS = 10_000
GAP_TOL = 1e-12


@dataclass
class BatchPCAResult:
    basis: OrthonormalBasis
    eigenvalues: np.ndarray
    iterations: int
    ill_conditioned: bool = False
    converged: bool = True


def _guard(p: int):
    if p > config.ORACLE_MAX_DIM:
        raise OracleScaleError(p, config.ORACLE_MAX_DIM)


def empirical_covariance(samples: Union[np.ndarray, SampleStream, Iterable]) -> np.ndarray:
    """(1/n)·Σ x·xᵀ aus Array, Stream oder Iterable von Vektoren"""
    if isinstance(samples, SampleStream):
        p = samples.dim
        _guard(p)
        C = np.zeros((p, p))
        n = 0
        chunk = default_batch_size(p)
        while True:
            x = samples.take(chunk)
            if x.shape[0] == 0:
                break
            C += x.T @ x
            n += x.shape[0]
    else:
        X = np.asarray(samples if isinstance(samples, np.ndarray) else list(samples), dtype=np.float64)
        if X.size == 0:
            raise ValidationError("Batch-PCA braucht mindestens ein Sample")
        if X.ndim == 1:
            X = X.reshape(1, -1)
        X = as_matrix(X)
        n, p = X.shape
        _guard(p)
        C = X.T @ X
    if n < 1:
        raise ValidationError("Batch-PCA braucht mindestens ein Sample")
    C /= n
    return 0.5 * (C + C.T)


def _orthonormal_with_fill(Z: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """QR von Z; rangdefizite Spalten werden durch Zufallsrichtungen ersetzt"""
    W = Z.copy()
    for _ in range(W.shape[1] + 1):
        try:
            Q, _ = qr_decompose(W)
            return Q.columns
        except RankDeficientError as e:
            W[:, e.column] = rng.standard_normal(W.shape[0])
    Q, _ = qr_decompose(W)
    return Q.columns


def batch_pca_on_matrix(C, k: int, seed: int = config.DEFAULT_SEED) -> BatchPCAResult:
    """Top-k-Eigenraum einer symmetrischen PSD-Matrix per orthogonaler Iteration"""
    M = as_matrix(C)
    p = M.shape[0]
    if M.shape[1] != p:
        raise ValidationError(f"Quadratische Matrix erwartet, erhalten: {M.shape}")
    _guard(p)
    if not 1 <= k <= p:
        raise ValidationError(f"Erwartet 1 ≤ k ≤ p, erhalten: k={k}, p={p}")

    # eine Zusatzspalte beschleunigt die Konvergenz und liefert λ_{k+1} für den Gap-Test
    width = k + 1 if k < p else k
    rng = role_rng(seed, "init")
    Q = _orthonormal_with_fill(sample_gaussian_matrix(p, width, rng), rng)

    converged = False
    iterations = 0
    ritz = np.zeros(width)
    Y = Q
    for iterations in range(1, MAX_ITERATIONS + 1):
        Z = M @ Q
        H = Q.T @ Z
        ritz, V = jacobi_eigh(H)
        Y = Q @ V
        CY = Z @ V
        residual = CY[:, :k] - Y[:, :k] * ritz[None, :k]
        scale = abs(ritz[0])
        if scale == 0.0 or spectral_norm(residual) <= RESIDUAL_TOL * scale:
            converged = True
            break
        Q = _orthonormal_with_fill(Z, rng)

    if not converged:
        logger.warning(f"Batch-PCA nicht konvergiert nach {MAX_ITERATIONS} Iterationen")

    ill_conditioned = False
    if width > k and ritz[k - 1] - ritz[k] < GAP_TOL * max(abs(ritz[0]), 1e-300):
        ill_conditioned = True
        logger.warning(f"Eigenlücke λ_k − λ_(k+1) = {ritz[k - 1] - ritz[k]:.3e} zu klein, Ergebnis schlecht konditioniert")

    basis, _ = qr_decompose(Y[:, :k])
    # QR ändert nur Vorzeichen der bereits orthonormalen Ritz-Vektoren
    return BatchPCAResult(basis, ritz[:k].copy(), iterations, ill_conditioned, converged)


def batch_pca(samples: Union[np.ndarray, SampleStream, Iterable], k: int,
              seed: int = config.DEFAULT_SEED) -> BatchPCAResult:
    """SVD-Orakel auf der empirischen Kovarianzmatrix"""
    C = empirical_covariance(samples)
    logger.debug(f"Empirische Kovarianz gebildet: p={C.shape[0]}")
    return batch_pca_on_matrix(C, k, seed)
