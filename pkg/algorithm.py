"""
Block-stochastische Potenzmethode und orthogonale Iteration

Pro Block von B Samples wird S = (1/B)·Σ x·(xᵀQ) online akkumuliert (nie
x·xᵀ), danach Q ← QR(S). Der Arbeitszustand sind zwei p×k-Matrizen plus
O(k²); gelesen wird in Chunks, nie ein ganzer Block auf einmal.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np
import pandas as pd

import config
from errors import (DegenerateBlockError, InsufficientSamplesError, PartialStreamError,
                    RankDeficientError, ValidationError)
from linalg import (BasisLike, OrthonormalBasis, as_matrix, polar_project, qr_decompose,
                    sample_gaussian_matrix, spectral_norm)
from metrics import principal_angle_distance
from rng import derive_seed, make_rng
from stream import SampleStream, ensure_trainable

logger = logging.getLogger(__name__)

PROVENANCES = ('theorem1', 'theorem2', 'empirical', 'manual')
DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class BlockSchedule:
    block_size: int
    block_count: int
    provenance: str = 'manual'

    def __post_init__(self):
        if self.block_size < 1 or self.block_count < 1:
            raise ValidationError(f"B und T müssen ≥ 1 sein, erhalten: B={self.block_size}, T={self.block_count}")
        if self.provenance not in PROVENANCES:
            raise ValidationError(f"Unbekannte Herkunft '{self.provenance}'")

    @property
    def total_samples(self) -> int:
        return self.block_size * self.block_count


def _check_eps(eps: float):
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"eps muss in (0, 1) liegen, erhalten: {eps}")


def _check_constants(c_B: float, c_T: float):
    if c_B <= 0 or c_T <= 0:
        raise ValidationError(f"c_B und c_T müssen > 0 sein, erhalten: c_B={c_B}, c_T={c_T}")


def theorem1_schedule(p: int, sigma: float, eps: float,
                      c_B: float = config.DEFAULT_C_B, c_T: float = config.DEFAULT_C_T) -> BlockSchedule:
    """Rang 1: T = ⌈c_T·log(p/ε)/log((σ²+¾)/(σ²+½))⌉, B = ⌈c_B·(1+3(σ+σ²)√p)²·log(T+1)/ε²⌉"""
    if p < 1:
        raise ValidationError(f"p muss ≥ 1 sein, erhalten: {p}")
    if sigma < 0:
        raise ValidationError(f"sigma muss ≥ 0 sein, erhalten: {sigma}")
    _check_eps(eps)
    _check_constants(c_B, c_T)
    s2 = sigma * sigma
    ratio = (s2 + 0.75) / (s2 + 0.5)
    T = max(1, math.ceil(c_T * math.log(p / eps) / math.log(ratio)))
    B = max(1, math.ceil(c_B * (1.0 + 3.0 * (sigma + s2) * math.sqrt(p)) ** 2 * math.log(T + 1) / eps ** 2))
    return BlockSchedule(B, T, 'theorem1')


def theorem2_schedule(p: int, k: int, sigma: float, lambda_k: float, eps: float,
                      c_B: float = config.DEFAULT_C_B, c_T: float = config.DEFAULT_C_T) -> BlockSchedule:
    """Rang k: Formeln mit λ_k, Ceiling und log(T+1)"""
    if p < 1 or k < 1 or k > p:
        raise ValidationError(f"Erwartet 1 ≤ k ≤ p, erhalten: p={p}, k={k}")
    if sigma < 0:
        raise ValidationError(f"sigma muss ≥ 0 sein, erhalten: {sigma}")
    if not 0.0 < lambda_k <= 1.0:
        raise ValidationError(f"lambda_k muss in (0, 1] liegen, erhalten: {lambda_k}")
    _check_eps(eps)
    _check_constants(c_B, c_T)
    s2 = sigma * sigma
    l2 = lambda_k * lambda_k
    ratio = (s2 + 0.75 * l2) / (s2 + 0.5 * l2)
    T = max(1, math.ceil(c_T * math.log(p / (k * eps)) / math.log(ratio)))
    signal = (1.0 + sigma) ** 2 * math.sqrt(k) + sigma * math.sqrt(1.0 + s2) * k * math.sqrt(p)
    B = max(1, math.ceil(c_B * signal ** 2 * math.log(T + 1) / (l2 * l2 * eps ** 2)))
    return BlockSchedule(B, T, 'theorem2')


def empirical_schedule(n: int, p: int) -> BlockSchedule:
    """T = ⌈ln p⌉, B = ⌊n/T⌋; übrige n − B·T Samples bleiben ungenutzt"""
    if p < 1:
        raise ValidationError(f"p muss ≥ 1 sein, erhalten: {p}")
    T = max(1, math.ceil(math.log(p)))
    if n < T:
        raise InsufficientSamplesError(f"n={n} Samples reichen nicht für T={T} Blöcke")
    return BlockSchedule(n // T, T, 'empirical')


def manual_schedule(block_size: int, block_count: int) -> BlockSchedule:
    return BlockSchedule(block_size, block_count, 'manual')


def default_instance_count(p: int) -> int:
    """⌈log₂ p⌉ parallele Instanzen für das Boosting"""
    return max(1, math.ceil(math.log2(max(p, 2))))


# ---------------------------------------------------------------------------
# Ergebnis-Typen

@dataclass
class SubspaceEstimate:
    basis: OrthonormalBasis
    blocks_consumed: int
    samples_consumed: int

    @property
    def columns(self) -> np.ndarray:
        return self.basis.columns

    @property
    def vector(self) -> np.ndarray:
        """Rang-1-Schätzer als Vektor"""
        return self.basis.columns[:, 0]


class TraceRow(NamedTuple):
    block: int
    distance: Optional[float]
    accumulator_norm: float


@dataclass
class RunReport:
    final: SubspaceEstimate
    trace: List[TraceRow]
    schedule: BlockSchedule
    seed: int
    stream_samples: int = 0
    iterates: Optional[List[np.ndarray]] = None
    scores: Optional[List[float]] = None
    selected: int = 0
    mode: str = 'standard'

    @property
    def final_distance(self) -> Optional[float]:
        return self.trace[-1].distance if self.trace else None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.trace, columns=['block', 'distance', 'accumulator_norm'])

    def to_csv(self, path_or_buf=None):
        frame = self.to_frame()
        frame.insert(0, 'mode', self.mode)
        return frame.to_csv(path_or_buf, index=False, float_format=config.CSV_FLOAT_FORMAT)

    def summary(self) -> dict:
        return {
            'final_distance': self.final_distance,
            'samples_consumed': self.final.samples_consumed,
            'seed': self.seed,
            'block_size': self.schedule.block_size,
            'block_count': self.schedule.block_count,
            'provenance': self.schedule.provenance,
        }

    def summary_line(self) -> str:
        s = self.summary()
        distance = 'n/a' if s['final_distance'] is None else f"{s['final_distance']:.12g}"
        return (f"final_distance={distance} samples_consumed={s['samples_consumed']} seed={s['seed']} "
                f"B={s['block_size']} T={s['block_count']} provenance={s['provenance']}")


# ---------------------------------------------------------------------------
# Gemeinsamer Kern für eine oder mehrere Instanzen

def _chunk_size(chunk_size: Optional[int], p: int, width: int) -> int:
    if chunk_size is not None:
        if chunk_size < 1:
            raise ValidationError(f"chunk_size muss ≥ 1 sein, erhalten: {chunk_size}")
        return chunk_size
    return max(width, config.CHUNK_BUFFER_NUMBERS // max(1, p))


def initial_basis(p: int, k: int, seed: int, index: int, rank1: bool) -> np.ndarray:
    """Gauß-Start, normiert (Rang 1) bzw. per QR (Rang k)"""
    rng = make_rng(derive_seed(seed, "init", index))
    G = sample_gaussian_matrix(p, k, rng)
    if rank1:
        return G / np.linalg.norm(G)
    Q, _ = qr_decompose(G, overwrite=True)
    return Q.columns


def _orthonormalize(S: np.ndarray, block: int, rank1: bool) -> np.ndarray:
    if rank1:
        norm = float(np.linalg.norm(S))
        if norm < DEGENERATE_TOL:
            raise DegenerateBlockError(block)
        S /= norm
        return S
    try:
        Q, _ = qr_decompose(S, overwrite=True)
    except RankDeficientError as e:
        raise DegenerateBlockError(block, f"Degenerierter Block {block}: S ohne vollen Rang (Spalte {e.column})") from e
    return Q.columns


def _run_instances(stream: SampleStream, k: int, schedule: BlockSchedule, seed: int,
                   instances: List[int], reference: Optional[np.ndarray], chunk_size: Optional[int],
                   keep_iterates: bool, rank1: bool):
    """Führt m Instanzen über denselben Durchlauf; jedes Sample geht an alle Instanzen"""
    ensure_trainable(stream)
    p = stream.dim
    if not 1 <= k <= p:
        raise ValidationError(f"Erwartet 1 ≤ k ≤ p, erhalten: k={k}, p={p}")
    if reference is not None and reference.shape[0] != p:
        raise ValidationError(f"Referenzbasis hat Dimension {reference.shape[0]}, Stream {p}")
    m = len(instances)
    B, T = schedule.block_size, schedule.block_count
    chunk = _chunk_size(chunk_size, p, k * m)

    Q = np.hstack([initial_basis(p, k, seed, i, rank1) for i in instances]) if m > 1 \
        else initial_basis(p, k, seed, instances[0], rank1)
    traces: List[List[TraceRow]] = [[] for _ in range(m)]
    iterates: Optional[List[np.ndarray]] = [] if keep_iterates else None

    for tau in range(T):
        S = np.zeros((p, k * m))
        filled = 0
        while filled < B:
            x = stream.take(min(chunk, B - filled))
            if x.shape[0] == 0:
                raise PartialStreamError(tau, B * T, tau * B + filled)
            xq = x @ Q
            xq /= B
            S += x.T @ xq
            filled += x.shape[0]
            # alte Puffer-Sicht vor dem nächsten take() freigeben
            del x, xq

        if m == 1:
            Q = None
        for i in range(m):
            cols = slice(i * k, (i + 1) * k)
            S_i = S[:, cols]
            norm = spectral_norm(S_i)
            Q_i = _orthonormalize(S_i, tau + 1, rank1)
            if m == 1:
                Q = Q_i
            else:
                Q[:, cols] = Q_i
            distance = principal_angle_distance(reference, Q_i) if reference is not None else None
            traces[i].append(TraceRow(tau + 1, distance, norm))
        del S
        if iterates is not None:
            iterates.append(Q.copy())
        logger.debug(f"Block {tau + 1}/{T} abgeschlossen")

    return Q, traces, iterates


def _reference_columns(reference: Optional[BasisLike]) -> Optional[np.ndarray]:
    return None if reference is None else as_matrix(reference)


def block_power_method_rank1(stream: SampleStream, schedule: BlockSchedule, seed: int,
                             reference: Optional[BasisLike] = None, chunk_size: Optional[int] = None,
                             keep_iterates: bool = False) -> RunReport:
    """Block-stochastische Potenzmethode für die erste Hauptkomponente"""
    logger.info(f"Starte Potenzmethode (Rang 1): p={stream.dim}, B={schedule.block_size}, T={schedule.block_count}")
    q, traces, iterates = _run_instances(stream, 1, schedule, seed, [0], _reference_columns(reference),
                                         chunk_size, keep_iterates, rank1=True)
    estimate = SubspaceEstimate(OrthonormalBasis(q), schedule.block_count, schedule.total_samples)
    return RunReport(estimate, traces[0], schedule, seed, stream.consumed_count, iterates)


def block_orthogonal_iteration(stream: SampleStream, k: int, schedule: BlockSchedule, seed: int,
                               reference: Optional[BasisLike] = None, chunk_size: Optional[int] = None,
                               keep_iterates: bool = False) -> RunReport:
    """Block-stochastische orthogonale Iteration für k Komponenten"""
    logger.info(f"Starte orthogonale Iteration: p={stream.dim}, k={k}, "
                f"B={schedule.block_size}, T={schedule.block_count}")
    Q, traces, iterates = _run_instances(stream, k, schedule, seed, [0], _reference_columns(reference),
                                         chunk_size, keep_iterates, rank1=False)
    estimate = SubspaceEstimate(OrthonormalBasis(Q), schedule.block_count, schedule.total_samples)
    return RunReport(estimate, traces[0], schedule, seed, stream.consumed_count, iterates)


def _rayleigh_scores(stream: SampleStream, bases: List[np.ndarray], eval_block: int,
                     chunk: int, blocks_completed: int, samples_needed: int) -> List[float]:
    """(1/eval_block)·Σ‖Qᵢᵀx‖² auf frischen Samples"""
    stacked = np.hstack(bases)
    bounds = np.cumsum([0] + [b.shape[1] for b in bases])
    totals = np.zeros(len(bases))
    seen = 0
    while seen < eval_block:
        x = stream.take(min(chunk, eval_block - seen))
        if x.shape[0] == 0:
            raise PartialStreamError(blocks_completed, samples_needed, stream.consumed_count)
        energy = np.sum((x @ stacked) ** 2, axis=0)
        totals += np.add.reduceat(energy, bounds[:-1])
        seen += x.shape[0]
    return [float(v) / eval_block for v in totals]


def boosted_recovery(stream: SampleStream, k: int, schedule: BlockSchedule, m: int, eval_block: int,
                     seed: int = config.DEFAULT_SEED, reference: Optional[BasisLike] = None,
                     chunk_size: Optional[int] = None) -> RunReport:
    """
    m unabhängig initialisierte Instanzen im selben Durchlauf, danach Auswahl
    per empirischer Rayleigh-Spur auf eval_block frischen Samples.
    """
    if m < 1:
        raise ValidationError(f"m muss ≥ 1 sein, erhalten: {m}")
    if eval_block < 0 or (m > 1 and eval_block < 1):
        raise ValidationError(f"eval_block muss ≥ 1 sein (bei m > 1), erhalten: {eval_block}")
    logger.info(f"Starte Boosting: m={m} Instanzen, k={k}, Auswertungsblock={eval_block}")
    ref = _reference_columns(reference)
    Q, traces, _ = _run_instances(stream, k, schedule, seed, list(range(m)), ref, chunk_size, False, rank1=False)
    candidates = [Q[:, i * k:(i + 1) * k] for i in range(m)]

    scores = None
    selected = 0
    if eval_block > 0:
        chunk = _chunk_size(chunk_size, stream.dim, k * m)
        scores = _rayleigh_scores(stream, candidates, eval_block, chunk,
                                  schedule.block_count, schedule.total_samples + eval_block)
        selected = int(np.argmax(scores))
        logger.info(f"Beste Instanz: {selected} (Rayleigh-Spur {scores[selected]:.6f})")

    estimate = SubspaceEstimate(OrthonormalBasis(candidates[selected].copy()),
                                schedule.block_count, schedule.total_samples)
    return RunReport(estimate, traces[selected], schedule, seed, stream.consumed_count,
                     scores=scores, selected=selected)


def restarted_recovery(stream: SampleStream, k: int, schedule: BlockSchedule, m: int, eval_block: int,
                       seed: int = config.DEFAULT_SEED, reference: Optional[BasisLike] = None,
                       chunk_size: Optional[int] = None) -> RunReport:
    """
    Sequentielle Variante: m Läufe auf jeweils frischen Daten; nach jedem Lauf
    bewertet der nächste Block den bisher besten und den neuen Kandidaten.
    """
    if m < 1 or eval_block < 1:
        raise ValidationError(f"m und eval_block müssen ≥ 1 sein, erhalten: m={m}, eval_block={eval_block}")
    ref = _reference_columns(reference)
    chunk = _chunk_size(chunk_size, stream.dim, k)
    needed = m * (schedule.total_samples + eval_block)
    best = None
    best_trace: List[TraceRow] = []
    best_index = 0
    history: List[float] = []
    for i in range(m):
        Q, traces, _ = _run_instances(stream, k, schedule, seed, [i], ref, chunk_size, False, rank1=False)
        bases = [Q] if best is None else [best, Q]
        scores = _rayleigh_scores(stream, bases, eval_block, chunk, schedule.block_count, needed)
        if best is None or scores[-1] > scores[0]:
            best, best_trace, best_index = Q, traces[0], i
        history.append(max(scores))
        logger.debug(f"Neustart {i + 1}/{m}: bester Kandidat {best_index}")

    estimate = SubspaceEstimate(OrthonormalBasis(best), schedule.block_count, schedule.total_samples)
    return RunReport(estimate, best_trace, schedule, seed, stream.consumed_count,
                     scores=history, selected=best_index)


# ---------------------------------------------------------------------------
# Stochastische Potenzmethode pro Sample (Vergleichsverfahren)

@dataclass(frozen=True)
class StepRule:
    """Schrittweite η_t: 'inverse_time' (c/t), 'constant' (c) oder 'default' (1/(σ²t + p), σ muss gesetzt sein)"""
    kind: str = 'default'
    c: float = 1.0
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ('inverse_time', 'constant', 'default'):
            raise ValidationError(f"Unbekannte Schrittweitenregel '{self.kind}'")
        if self.kind == 'default' and self.sigma is None:
            raise ValidationError("Standard-Schrittweite 1/(σ²t + p) braucht sigma")
        if self.c < 0 or (self.sigma is not None and self.sigma < 0):
            raise ValidationError("c und sigma müssen ≥ 0 sein")

    @classmethod
    def constant(cls, eta: float) -> 'StepRule':
        return cls('constant', c=eta)

    @classmethod
    def inverse_time(cls, c: float) -> 'StepRule':
        return cls('inverse_time', c=c)

    @classmethod
    def default(cls, sigma: float) -> 'StepRule':
        return cls('default', sigma=sigma)

    def eta(self, t: int, p: int) -> float:
        if self.kind == 'constant':
            return self.c
        if self.kind == 'inverse_time':
            return self.c / t
        return 1.0 / (self.sigma ** 2 * t + p)


def oja_baseline(stream: SampleStream, k: int, step_rule: Optional[StepRule] = None,
                 seed: int = config.DEFAULT_SEED, chunk_size: Optional[int] = None,
                 sigma: Optional[float] = None) -> SubspaceEstimate:
    """
    U ← Proj(U + η_t·x·xᵀ·U) pro Sample; ohne Genauigkeitsgarantie.

    Ohne step_rule gilt η_t = 1/(σ²t + p). σ kommt aus `sigma` oder, bei
    einem Modell-Stream, aus dessen Modell; sonst ValidationError.
    """
    ensure_trainable(stream)
    p = stream.dim
    if not 1 <= k <= p:
        raise ValidationError(f"Erwartet 1 ≤ k ≤ p, erhalten: k={k}, p={p}")
    if step_rule is None:
        if sigma is None:
            model = getattr(stream, 'model', None)
            sigma = model.sigma if model is not None else None
        if sigma is None:
            raise ValidationError("Oja ohne step_rule braucht sigma (oder einen Modell-Stream)")
        step_rule = StepRule.default(sigma)
    U = initial_basis(p, k, seed, 0, rank1=(k == 1))
    chunk = _chunk_size(chunk_size, p, k)
    t = 0
    while True:
        x = stream.take(chunk)
        if x.shape[0] == 0:
            break
        for row in x:
            t += 1
            eta = step_rule.eta(t, p)
            if eta == 0.0:
                continue
            U = polar_project(U + eta * np.outer(row, row @ U)).columns
    if t == 0:
        raise ValidationError("Stream ist leer")
    logger.info(f"Oja-Vergleichslauf abgeschlossen: {t} Samples")
    return SubspaceEstimate(OrthonormalBasis(U), t, t)
