"""
Unterparametrisierte Rekonstruktion: gesuchter Rang k < wahrer Rang r

Geprüft wird nur, dass span(Q_T) in span(U) liegt (Containment
‖U⊥ᵀQ_T‖₂), nicht welche k Richtungen von U getroffen werden.
"""

import logging
from typing import List, NamedTuple, Optional

import numpy as np

import config
from algorithm import BlockSchedule, RunReport, block_orthogonal_iteration, theorem2_schedule
from errors import ValidationError
from linalg import jacobi_eigh
from metrics import principal_angle_distance
from model import SpikedModel
from stream import SampleStream, stream_from_model

logger = logging.getLogger(__name__)


class UnderparameterizedResult(NamedTuple):
    report: RunReport
    containment: float


def _check_rank(model: SpikedModel, k: int):
    if k < 1:
        raise ValidationError(f"k muss ≥ 1 sein, erhalten: {k}")
    if k >= model.r:
        raise ValidationError(
            f"Unterparametrisierter Modus braucht k < r, erhalten k={k}, r={model.r}; "
            f"für k = r den Standardpfad verwenden"
        )


def underparameterized_schedule(model: SpikedModel, k: int, eps: float,
                                c_B: float = config.DEFAULT_C_B,
                                c_T: float = config.DEFAULT_C_T) -> BlockSchedule:
    """theorem2-Schedule mit λ_r statt λ_k"""
    _check_rank(model, k)
    return theorem2_schedule(model.p, k, model.sigma, model.lambdas[-1], eps, c_B, c_T)


def run_underparameterized(model: SpikedModel, k: int, schedule: BlockSchedule, seed: int,
                           stream: Optional[SampleStream] = None,
                           chunk_size: Optional[int] = None) -> UnderparameterizedResult:
    """Orthogonale Iteration mit Rang k auf einem Rang-r-Stream; Trace-Distanz = Containment"""
    _check_rank(model, k)
    if stream is None:
        stream = stream_from_model(model, schedule.total_samples, seed)
    elif stream.dim != model.p:
        raise ValidationError(f"Stream hat Dimension {stream.dim}, Modell {model.p}")

    logger.info(f"Unterparametrisierter Lauf: p={model.p}, r={model.r}, k={k}")
    report = block_orthogonal_iteration(stream, k, schedule, seed, reference=model.U, chunk_size=chunk_size)
    report.mode = 'underparameterized'
    containment = principal_angle_distance(model.U, report.final.columns)
    logger.info(f"Containment ‖U⊥ᵀQ_T‖₂ = {containment:.6g}")
    cosines = top_k_alignment(model, report)
    logger.info(f"Ausrichtung an den ersten {k} Spikes: min. Kosinus {min(cosines):.6g}")
    return UnderparameterizedResult(report, containment)


def top_k_alignment(model: SpikedModel, report: RunReport) -> List[float]:
    """Kosinus der Hauptwinkel zwischen Q_T und den ersten k Spalten von U; nur Diagnose, kein Erfolgskriterium"""
    Q = report.final.columns
    k = Q.shape[1]
    overlap = model.U[:, :k].T @ Q
    eigenvalues, _ = jacobi_eigh(overlap.T @ overlap)
    cosines = [float(np.sqrt(max(v, 0.0))) for v in eigenvalues]
    return cosines
