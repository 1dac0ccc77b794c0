"""
Gütemaße für die Unterraum-Rekonstruktion
"""

import logging
from typing import List, Sequence

import numpy as np

from errors import ValidationError
from linalg import BasisLike, as_matrix, spectral_norm
from stream import SampleStream, default_batch_size

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-8


def principal_angle_distance(U: BasisLike, Q: BasisLike) -> float:
    """
    Sinus des größten Hauptwinkels: ‖(I − UUᵀ)Q‖₂ = ‖U⊥ᵀQ‖₂.

    U⊥ wird nie gebildet; Speicher O(p·k₂).
    """
    Uc = as_matrix(U)
    Qc = as_matrix(Q)
    if Uc.shape[0] != Qc.shape[0]:
        raise ValidationError(f"Dimensionen passen nicht: {Uc.shape[0]} vs. {Qc.shape[0]}")
    residual = Qc - Uc @ (Uc.T @ Qc)
    return min(spectral_norm(residual), 1.0)


def _unit_vector(v, name: str) -> np.ndarray:
    x = np.asarray(v, dtype=np.float64).reshape(-1)
    norm = float(np.linalg.norm(x))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValidationError(f"{name} muss Einheitslänge haben, ‖{name}‖ = {norm}")
    return x


def rank1_recovery_error(q, u) -> float:
    """min(‖q − u‖, ‖q + u‖): Vorzeichen ist nicht identifizierbar"""
    qv = _unit_vector(q, "q")
    uv = _unit_vector(u, "u")
    if qv.shape != uv.shape:
        raise ValidationError(f"Längen passen nicht: {qv.shape[0]} vs. {uv.shape[0]}")
    return float(min(np.linalg.norm(qv - uv), np.linalg.norm(qv + uv)))


def sin_squared(q, u) -> float:
    """δ = 1 − ⟨q, u⟩²"""
    qv = np.asarray(q, dtype=np.float64).reshape(-1)
    uv = np.asarray(u, dtype=np.float64).reshape(-1)
    return float(np.clip(1.0 - float(qv @ uv) ** 2, 0.0, 1.0))


def explained_variance_many(bases: Sequence[BasisLike], eval_stream: SampleStream) -> List[float]:
    """Tr(VᵀXXᵀV)/Tr(XXᵀ) für mehrere Basen in einem einzigen Durchlauf"""
    if not bases:
        raise ValidationError("Mindestens eine Basis erforderlich")
    columns = [as_matrix(V) for V in bases]
    for V in columns:
        if V.shape[0] != eval_stream.dim:
            raise ValidationError(f"Basis hat Dimension {V.shape[0]}, Stream {eval_stream.dim}")
    stacked = np.hstack(columns)
    bounds = np.cumsum([0] + [V.shape[1] for V in columns])

    numerators = np.zeros(len(columns))
    denominator = 0.0
    seen = 0
    chunk = default_batch_size(eval_stream.dim)
    while True:
        x = eval_stream.take(chunk)
        if x.shape[0] == 0:
            break
        seen += x.shape[0]
        energy = np.sum((x @ stacked) ** 2, axis=0)
        numerators += np.add.reduceat(energy, bounds[:-1])
        denominator += float(np.einsum('ij,ij->', x, x))

    if seen == 0:
        raise ValidationError("Auswertungsstream ist leer")
    if denominator == 0.0:
        raise ValidationError("Alle Samples sind null, Tr(XXᵀ) = 0")
    logger.debug(f"Erklärte Varianz über {seen} Samples ausgewertet")
    return [float(min(v / denominator, 1.0)) for v in numerators]


def explained_variance(V: BasisLike, eval_stream: SampleStream) -> float:
    return explained_variance_many([V], eval_stream)[0]
