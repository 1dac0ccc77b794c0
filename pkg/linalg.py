"""
Minimale dichte lineare Algebra für p×k-Matrizen

Householder-QR, Spektralnorm (Jacobi bzw. Unterraum-Iteration), Gauß-Matrizen,
Jacobi-Eigenlöser für kleine Gram-Matrizen und Polarprojektion.
Es wird nie eine p×p-Zerlegung gebildet: alles, was über k×k hinausgeht,
läuft über Matrix-Vektor- bzw. Matrix-Matrix-Produkte der Höhe p.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from errors import RankDeficientError, ValidationError

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-10
RANK_TOL = 1e-12
SPECTRAL_MAX_ITER = 1000
SPECTRAL_TOL = 1e-10
# bis hierhin direkt per Jacobi auf der Gram-Matrix
JACOBI_LIMIT = 32
# bis zu dieser kleineren Dimension wird die Gram-Matrix explizit gebildet
GRAM_LIMIT = 256
SPECTRAL_BLOCK = 8
SPECTRAL_DROP_TOL = 1e-12
# fester Startvektor-Seed, damit spectral_norm eine reine Funktion bleibt
_SPECTRAL_SEED = 20130000


def as_matrix(M) -> np.ndarray:
    """Prüft und konvertiert eine Eingabe zu einer endlichen 2-D float64-Matrix (ohne Kopie, falls möglich)"""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        raise ValidationError(f"Matrix erwartet, erhalten: ndim={A.ndim}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValidationError(f"Matrix braucht mindestens eine Zeile und Spalte, erhalten: {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("Matrix enthält NaN oder Inf")
    return A


@dataclass(eq=False)
class OrthonormalBasis:
    """p×k-Matrix mit orthonormalen Spalten (keine Kopie der übergebenen Daten)"""
    columns: np.ndarray

    def __post_init__(self):
        self.columns = as_matrix(self.columns)
        if self.k > self.dim:
            raise ValidationError(f"k={self.k} größer als Dimension p={self.dim}")
        gram = self.columns.T @ self.columns
        deviation = np.max(np.abs(gram - np.eye(self.k)))
        if deviation > ORTHONORMAL_TOL:
            raise ValidationError(f"Spalten nicht orthonormal (max. Abweichung {deviation:.3e})")

    @property
    def dim(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.columns
        return self.columns.astype(dtype)

    def projector(self) -> np.ndarray:
        """QQᵀ (p×p, nur für kleine p)"""
        return self.columns @ self.columns.T


BasisLike = Union[OrthonormalBasis, np.ndarray]


def sample_gaussian_matrix(p: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix mit i.i.d. Standardnormal-Einträgen"""
    if p < 1 or k < 1:
        raise ValidationError(f"p und k müssen ≥ 1 sein, erhalten: p={p}, k={k}")
    return rng.standard_normal((p, k))


def qr_decompose(M, overwrite: bool = False) -> Tuple[OrthonormalBasis, np.ndarray]:
    """
    Dünne QR-Zerlegung per Householder-Spiegelungen.

    R ist obere Dreiecksmatrix mit strikt positiver Diagonale. Mit
    overwrite=True wird M als Arbeitsspeicher benutzt (M muss dann ein
    beschreibbares float64-Array sein) und ist danach unbrauchbar.
    """
    A = as_matrix(M)
    p, k = A.shape
    if p < k:
        raise ValidationError(f"QR braucht p ≥ k, erhalten: {p}×{k}")

    # Spaltennormen ohne p×k-Zwischenspeicher
    col_norms = np.sqrt(np.einsum('ij,ij->j', A, A))
    scale = float(col_norms.max())
    if scale == 0.0:
        raise RankDeficientError(0)
    tol = RANK_TOL * scale

    W = A if overwrite else A.copy()
    reflectors = []
    for j in range(k):
        x = W[j:, j]
        normx = float(np.linalg.norm(x))
        if normx <= tol:
            raise RankDeficientError(j)
        v = x.copy()
        v[0] += normx if x[0] >= 0 else -normx
        v /= np.linalg.norm(v)
        # spaltenweise, damit kein (p-j)×k-Zwischenspeicher entsteht
        for c in range(j, k):
            W[j:, c] -= (2.0 * (v @ W[j:, c])) * v
        reflectors.append(v)

    R = np.triu(W[:k, :k])

    Q = np.zeros((p, k))
    Q[np.arange(k), np.arange(k)] = 1.0
    for j in range(k - 1, -1, -1):
        v = reflectors[j]
        for c in range(j, k):
            Q[j:, c] -= (2.0 * (v @ Q[j:, c])) * v
    del reflectors

    # Vorzeichenkonvention: diag(R) > 0
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    R *= signs[:, None]
    Q *= signs[None, :]
    return OrthonormalBasis(Q), R


def _orthonormal_columns(W: np.ndarray) -> np.ndarray:
    """Orthonormalisiert die Spalten über ihre Gram-Matrix (zwei Durchgänge); fast abhängige Richtungen fallen weg"""
    for _ in range(2):
        values, vectors = jacobi_eigh(W.T @ W)
        if values[0] <= 0.0:
            return W[:, :0]
        keep = values > SPECTRAL_DROP_TOL * values[0]
        W = W @ (vectors[:, keep] / np.sqrt(values[keep])[None, :])
    return W


def spectral_norm(M) -> float:
    """
    Größter Singulärwert von M.

    Ist die kleinere Dimension höchstens JACOBI_LIMIT, wird λ_max der
    Gram-Matrix direkt per Jacobi bestimmt. Sonst Unterraum-Iteration mit
    Rayleigh–Ritz auf MᵀM (bzw. MMᵀ), Abbruch am Eigen-Residuum
    ‖Gy − ρy‖ ≤ SPECTRAL_TOL·ρ, höchstens SPECTRAL_MAX_ITER Schritte.
    """
    A = as_matrix(M)
    rows, cols = A.shape
    if not A.any():
        return 0.0
    if min(rows, cols) == 1:
        return float(np.linalg.norm(A))

    n = min(rows, cols)
    if n <= GRAM_LIMIT:
        G = A.T @ A if cols <= rows else A @ A.T
        if n <= JACOBI_LIMIT:
            values, _ = jacobi_eigh(G)
            return float(np.sqrt(max(values[0], 0.0)))

        def apply(V):
            return G @ V
    elif cols <= rows:
        def apply(V):
            return A.T @ (A @ V)
    else:
        def apply(V):
            return A @ (A.T @ V)

    rng = np.random.default_rng(_SPECTRAL_SEED)
    V = _orthonormal_columns(rng.standard_normal((n, min(SPECTRAL_BLOCK, n))))
    rho = 0.0
    for _ in range(SPECTRAL_MAX_ITER):
        W = apply(V)
        values, vectors = jacobi_eigh(V.T @ W)
        rho = float(values[0])
        if rho <= 0.0:
            return 0.0
        y = V @ vectors[:, 0]
        residual = float(np.linalg.norm(W @ vectors[:, 0] - rho * y))
        if residual <= SPECTRAL_TOL * rho:
            break
        V_next = _orthonormal_columns(W @ vectors)
        if V_next.shape[1] == 0:
            break
        V = V_next
    else:
        logger.warning(f"spectral_norm: Residuum nach {SPECTRAL_MAX_ITER} Schritten nicht unter {SPECTRAL_TOL}")
    return float(np.sqrt(rho))


def jacobi_eigh(S, max_sweeps: int = 64) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zyklischer Jacobi-Eigenlöser für kleine symmetrische Matrizen.
    Gibt Eigenwerte absteigend und Eigenvektoren als Spalten zurück.
    """
    A = as_matrix(S)
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValidationError(f"Quadratische Matrix erwartet, erhalten: {A.shape}")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    total = float(np.linalg.norm(A))
    if total == 0.0:
        return np.zeros(n), V

    for _ in range(max_sweeps):
        off = float(np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0)))
        if off <= 1e-15 * total:
            break
        for i in range(n - 1):
            for j in range(i + 1, n):
                a_ij = A[i, j]
                if abs(a_ij) <= 1e-300:
                    continue
                theta = (A[j, j] - A[i, i]) / (2.0 * a_ij)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_i = A[:, i].copy()
                col_j = A[:, j].copy()
                A[:, i] = c * col_i - s * col_j
                A[:, j] = s * col_i + c * col_j
                row_i = A[i, :].copy()
                row_j = A[j, :].copy()
                A[i, :] = c * row_i - s * row_j
                A[j, :] = s * row_i + c * row_j
                vec_i = V[:, i].copy()
                vec_j = V[:, j].copy()
                V[:, i] = c * vec_i - s * vec_j
                V[:, j] = s * vec_i + c * vec_j

    eigenvalues = np.diag(A).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    return eigenvalues[order], V[:, order]


def polar_project(M) -> OrthonormalBasis:
    """
    Polarfaktor U·Vᵀ der dünnen SVD von M.

    Der Rang wird über die Householder-QR geprüft (M = Q·R), danach wird nur
    der k×k-Faktor R über seine Gram-Matrix RᵀR (Jacobi) polarisiert:
    polar(M) = Q·polar(R). Der Spaltenraum bleibt erhalten.
    """
    A = as_matrix(M)
    p, k = A.shape
    if p < k:
        raise ValidationError(f"Polarprojektion braucht p ≥ k, erhalten: {p}×{k}")
    if k == 1:
        norm = float(np.linalg.norm(A))
        if norm == 0.0:
            raise RankDeficientError(0)
        return OrthonormalBasis(A / norm)

    Q, R = qr_decompose(A)
    eigenvalues, V = jacobi_eigh(R.T @ R)
    singular = np.sqrt(np.clip(eigenvalues, 0.0, None))
    if singular[-1] <= RANK_TOL * singular[0]:
        raise RankDeficientError(k - 1, "Polarprojektion: Matrix hat keinen vollen Spaltenrang")
    W = R @ ((V / singular[None, :]) @ V.T)
    return OrthonormalBasis(Q.columns @ W)
