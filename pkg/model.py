"""
Spiked-Covariance-Modell

x_t = A·z_t + w_t mit A = U·Λ·Vᵀ, z_t ~ N(0, I_r), w_t ~ N(0, σ²·I_p).
Das Modell ist nach der Konstruktion unveränderlich; jeder Thread braucht
seinen eigenen Generator.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

import config
from errors import OracleScaleError, ValidationError
from linalg import OrthonormalBasis, qr_decompose, sample_gaussian_matrix
from rng import role_rng

logger = logging.getLogger(__name__)

LAMBDA_TOL = 1e-12


def validate_lambdas(lambdas: Sequence[float]) -> Tuple[float, ...]:
    """Prüft: nichtleer, absteigend, λ₁ = 1, λ_r > 0"""
    values = tuple(float(v) for v in lambdas)
    if not values:
        raise ValidationError("lambdas darf nicht leer sein")
    if not all(np.isfinite(values)):
        raise ValidationError(f"lambdas enthält nicht-endliche Werte: {values}")
    if any(a < b for a, b in zip(values, values[1:])):
        raise ValidationError(f"lambdas muss absteigend sortiert sein: {values}")
    if abs(values[0] - 1.0) > LAMBDA_TOL:
        raise ValidationError(f"lambdas muss mit λ₁ = 1 normiert sein, erhalten λ₁ = {values[0]}")
    if values[-1] <= 0.0:
        raise ValidationError(f"lambdas muss strikt positiv sein: {values}")
    return values


@dataclass(eq=False)
class SpikedModel:
    p: int
    lambdas: Tuple[float, ...]
    sigma: float
    spike_basis: OrthonormalBasis
    right_basis: OrthonormalBasis
    mixing: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.lambdas = validate_lambdas(self.lambdas)
        if self.sigma < 0 or not np.isfinite(self.sigma):
            raise ValidationError(f"sigma muss ≥ 0 sein, erhalten: {self.sigma}")
        if self.spike_basis.dim != self.p or self.spike_basis.k != self.r:
            raise ValidationError(
                f"spike_basis hat Form {self.spike_basis.columns.shape}, erwartet ({self.p}, {self.r})"
            )
        if self.right_basis.dim != self.r or self.right_basis.k != self.r:
            raise ValidationError(f"right_basis muss {self.r}×{self.r} sein")
        # A = U Λ Vᵀ
        self.mixing = (self.spike_basis.columns * np.asarray(self.lambdas)[None, :]) @ self.right_basis.columns.T
        self.mixing.setflags(write=False)

    @property
    def r(self) -> int:
        return len(self.lambdas)

    @property
    def U(self) -> np.ndarray:
        return self.spike_basis.columns


def make_model(p: int, lambdas: Sequence[float], sigma: float, rng: np.random.Generator) -> SpikedModel:
    """Erzeugt U und V als QR-Faktoren von Gauß-Matrizen"""
    values = validate_lambdas(lambdas)
    r = len(values)
    if p < r:
        raise ValidationError(f"p={p} muss ≥ Rang r={r} sein")
    if sigma < 0:
        raise ValidationError(f"sigma muss ≥ 0 sein, erhalten: {sigma}")
    U, _ = qr_decompose(sample_gaussian_matrix(p, r, rng))
    V, _ = qr_decompose(sample_gaussian_matrix(r, r, rng))
    logger.debug(f"Modell erzeugt: p={p}, r={r}, sigma={sigma}")
    return SpikedModel(p=p, lambdas=values, sigma=float(sigma), spike_basis=U, right_basis=V)


def draw_sample(model: SpikedModel, rng: np.random.Generator) -> np.ndarray:
    """Ein Sample A·z + w (zuerst z, dann w aus dem Generator)"""
    z = rng.standard_normal(model.r)
    x = model.mixing @ z
    if model.sigma > 0:
        x += model.sigma * rng.standard_normal(model.p)
    return x


def draw_block(model: SpikedModel, rng: np.random.Generator, m: int) -> np.ndarray:
    """m Samples als (m, p)-Array; höchstens zwei m×p-Puffer gleichzeitig"""
    z = rng.standard_normal((m, model.r))
    x = z @ model.mixing.T
    if model.sigma > 0:
        noise = rng.standard_normal((m, model.p))
        noise *= model.sigma
        x += noise
        del noise
    return x


def population_covariance(model: SpikedModel) -> np.ndarray:
    """Orakel AAᵀ + σ²I (nur für kleine p)"""
    if model.p > config.ORACLE_MAX_DIM:
        raise OracleScaleError(model.p, config.ORACLE_MAX_DIM)
    M = model.mixing @ model.mixing.T
    M[np.diag_indices(model.p)] += model.sigma ** 2
    return 0.5 * (M + M.T)


# ---------------------------------------------------------------------------
# Modellkonfiguration als Textdatei (key = value) oder JSON

@dataclass
class ModelConfig:
    p: int
    lambdas: List[float]
    sigma: float
    seed: int = config.DEFAULT_SEED

    def build(self) -> SpikedModel:
        return make_model(self.p, self.lambdas, self.sigma, role_rng(self.seed, "model"))


def _parse_lambdas(raw) -> List[float]:
    if isinstance(raw, (list, tuple)):
        return [float(v) for v in raw]
    return [float(v) for v in str(raw).replace(';', ',').split(',') if v.strip()]


def load_model_config(path: str) -> ModelConfig:
    """Liest p, lambdas, sigma, seed aus einer key=value-Datei oder JSON"""
    logger.info(f"Lade Modellkonfiguration aus: {path}")
    if not os.path.exists(path):
        raise ValidationError(f"Konfigurationsdatei nicht gefunden: {path}")

    if path.endswith('.json'):
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    else:
        data = {}
        with open(path, 'r', encoding='utf-8') as f:
            for number, line in enumerate(f, start=1):
                line = line.split('#', 1)[0].strip()
                if not line:
                    continue
                if '=' not in line:
                    raise ValidationError(f"{path}, Zeile {number}: 'key = value' erwartet")
                key, value = line.split('=', 1)
                data[key.strip()] = value.strip()

    missing = [key for key in ('p', 'lambdas', 'sigma') if key not in data]
    if missing:
        raise ValidationError(f"Fehlende Schlüssel in {path}: {', '.join(missing)}")
    try:
        cfg = ModelConfig(
            p=int(data['p']),
            lambdas=_parse_lambdas(data['lambdas']),
            sigma=float(data['sigma']),
            seed=int(data.get('seed', config.DEFAULT_SEED)),
        )
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Ungültiger Wert in {path}: {e}") from e
    validate_lambdas(cfg.lambdas)
    return cfg


def save_model_config(cfg: ModelConfig, path: str):
    """Schreibt die Konfiguration im key=value-Format"""
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f"p = {cfg.p}\n")
        f.write(f"lambdas = {', '.join(repr(float(v)) for v in cfg.lambdas)}\n")
        f.write(f"sigma = {float(cfg.sigma)!r}\n")
        f.write(f"seed = {cfg.seed}\n")
    logger.info(f"Modellkonfiguration gespeichert als: {path}")


def linspace_lambdas(r: int, smallest: Optional[float] = None) -> List[float]:
    """Gleichabständige Spikes 1 … smallest (Standard: 1/r)"""
    if r < 1:
        raise ValidationError(f"r muss ≥ 1 sein, erhalten: {r}")
    if r == 1:
        return [1.0]
    low = smallest if smallest is not None else 1.0 / r
    return [float(v) for v in np.linspace(1.0, low, r)]
