"""
Ausführbare Formen der analytischen Größen

Kontraktionsfaktor, Rekursionsschranke für δ_τ = 1 − ⟨q_τ, u⟩²,
Konzentration der Block-Kovarianz und Überlapp der Zufallsinitialisierung.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

import config
from algorithm import initial_basis
from errors import OracleScaleError, ValidationError
from linalg import jacobi_eigh, qr_decompose, sample_gaussian_matrix, spectral_norm
from model import SpikedModel, draw_block, make_model, population_covariance
from rng import derive_seed, make_rng, role_rng

logger = logging.getLogger(__name__)

GRID_TOL = 1e-12
OVERLAP_QUANTILES = (0.01, 0.05, 0.5)


def contraction_factor(sigma: float, lambda_k: float = 1.0) -> float:
    """γ = (σ² + λ_k²/2)/(σ² + 3λ_k²/4)"""
    if sigma < 0:
        raise ValidationError(f"sigma muss ≥ 0 sein, erhalten: {sigma}")
    if not 0.0 < lambda_k <= 1.0:
        raise ValidationError(f"lambda_k muss in (0, 1] liegen, erhalten: {lambda_k}")
    s2 = sigma * sigma
    l2 = lambda_k * lambda_k
    return (s2 + 0.5 * l2) / (s2 + 0.75 * l2)


def _check_gamma(gamma: float):
    if not 0.0 < gamma <= 1.0:
        raise ValidationError(f"gamma muss in (0, 1] liegen, erhalten: {gamma}")


def recursion_closed_form(delta0: float, gamma: float, tau: int) -> float:
    """γ^{2τ}·δ₀ / (1 − (1 − γ^{2τ})·δ₀)"""
    if delta0 == 1.0:
        raise ValidationError("delta0 = 1 ist singulär (Start orthogonal zum Ziel)")
    if not 0.0 <= delta0 < 1.0:
        raise ValidationError(f"delta0 muss in [0, 1) liegen, erhalten: {delta0}")
    _check_gamma(gamma)
    if tau < 0:
        raise ValidationError(f"tau muss ≥ 0 sein, erhalten: {tau}")
    g = gamma ** (2 * tau)
    return g * delta0 / (1.0 - (1.0 - g) * delta0)


def recursion_one_step(delta: float, gamma: float) -> float:
    """γ²δ / (1 − δ + γ²δ)"""
    if not 0.0 <= delta < 1.0:
        raise ValidationError(f"delta muss in [0, 1) liegen, erhalten: {delta}")
    _check_gamma(gamma)
    g2 = gamma * gamma
    return g2 * delta / (1.0 - delta + g2 * delta)


@dataclass
class GridCheckResult:
    cells: int
    passed: int
    failed: int
    max_excess: float

    @property
    def all_passed(self) -> bool:
        return self.failed == 0


def recursion_grid_check(deltas: Optional[Sequence[float]] = None, gammas: Optional[Sequence[float]] = None,
                         max_tau: int = 100) -> GridCheckResult:
    """Iterierter Einzelschritt gegen geschlossene Form auf einem (δ₀, γ, τ)-Gitter"""
    d0 = np.asarray(deltas if deltas is not None else np.linspace(0.01, 0.99, 20), dtype=np.float64)
    g = np.asarray(gammas if gammas is not None else np.linspace(0.05, 0.95, 20), dtype=np.float64)
    D0, G = np.meshgrid(d0, g, indexing='ij')
    G2 = G * G

    delta = D0.copy()
    passed = 0
    failed = 0
    max_excess = -np.inf
    for tau in range(0, max_tau + 1):
        if tau > 0:
            delta = G2 * delta / (1.0 - delta + G2 * delta)
        Gt = G ** (2 * tau)
        closed = Gt * D0 / (1.0 - (1.0 - Gt) * D0)
        excess = delta - closed
        ok = excess <= GRID_TOL
        passed += int(ok.sum())
        failed += int((~ok).sum())
        max_excess = max(max_excess, float(excess.max()))
    logger.info(f"Rekursionsgitter: {passed} bestanden, {failed} verletzt")
    return GridCheckResult(passed + failed, passed, failed, max_excess)


def covariance_deviation(block, model: SpikedModel) -> float:
    """‖(1/B)·Σ x·xᵀ − (AAᵀ + σ²I)‖₂ für einen Block (nur kleine p)"""
    X = np.asarray(block, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[0] < 1:
        raise ValidationError("Block ist leer")
    if X.shape[1] != model.p:
        raise ValidationError(f"Samples haben Dimension {X.shape[1]}, Modell {model.p}")
    if model.p > config.ORACLE_MAX_DIM:
        raise OracleScaleError(model.p, config.ORACLE_MAX_DIM)
    F = (X.T @ X) / X.shape[0]
    return spectral_norm(F - population_covariance(model))


def concentration_scaling(p: int, sigma: float, block_sizes: Sequence[int], trials: int,
                          seed: int = config.DEFAULT_SEED,
                          lambdas: Sequence[float] = (1.0,)) -> pd.DataFrame:
    """Median der Abweichung pro Blockgröße; Verhältnis zur ersten Blockgröße"""
    if trials < 1 or not block_sizes:
        raise ValidationError("trials ≥ 1 und mindestens eine Blockgröße erforderlich")
    model = make_model(p, lambdas, sigma, role_rng(seed, "model"))
    rows = []
    for B in block_sizes:
        deviations = []
        for trial in range(trials):
            rng = make_rng(derive_seed(seed, "trial", trial))
            deviations.append(covariance_deviation(draw_block(model, rng, int(B)), model))
        rows.append({'block_size': int(B), 'median_deviation': float(np.median(deviations))})
        logger.debug(f"Konzentration: B={B}, Median={rows[-1]['median_deviation']:.6f}")
    frame = pd.DataFrame(rows)
    frame['ratio_to_first'] = frame['median_deviation'] / frame['median_deviation'].iloc[0]
    return frame


@dataclass
class OverlapSummary:
    p: int
    k: int
    trials: int
    sigma_k: np.ndarray = field(repr=False)
    quantiles: Dict[float, float] = field(default_factory=dict)

    @property
    def scaled(self) -> np.ndarray:
        """σ_k(UᵀQ₀)·√(kp)"""
        return self.sigma_k * np.sqrt(self.k * self.p)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'p': self.p, 'k': self.k, 'trials': self.trials,
            'quantile': list(self.quantiles.keys()),
            'scaled_overlap': list(self.quantiles.values()),
        })


def initialization_overlap_stats(p: int, k: int, trials: int, seed: int = config.DEFAULT_SEED,
                                 reference=None) -> OverlapSummary:
    """Verteilung von σ_k(UᵀQ₀) für die Zufallsinitialisierung gegen ein festes U"""
    if trials < 100:
        raise ValidationError(f"Mindestens 100 Trials erforderlich, erhalten: {trials}")
    if not 1 <= k <= p:
        raise ValidationError(f"Erwartet 1 ≤ k ≤ p, erhalten: k={k}, p={p}")
    if reference is None:
        U, _ = qr_decompose(sample_gaussian_matrix(p, k, role_rng(seed, "model")))
        U = U.columns
    else:
        U = np.asarray(reference, dtype=np.float64)
        if U.shape[0] != p:
            raise ValidationError(f"Referenz hat Dimension {U.shape[0]}, erwartet {p}")

    values = np.empty(trials)
    for trial in range(trials):
        Q0 = initial_basis(p, k, derive_seed(seed, "trial", trial), 0, rank1=(k == 1))
        overlap = U.T @ Q0
        eigenvalues, _ = jacobi_eigh(overlap.T @ overlap)
        values[trial] = float(np.sqrt(max(eigenvalues[-1], 0.0)))

    summary = OverlapSummary(p, k, trials, values)
    summary.quantiles = {q: float(np.quantile(summary.scaled, q)) for q in OVERLAP_QUANTILES}
    logger.info(f"Initialisierungsüberlapp p={p}, k={k}: 1%-Quantil {summary.quantiles[0.01]:.4f}")
    return summary
