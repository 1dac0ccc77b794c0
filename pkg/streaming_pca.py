#!/usr/bin/env python3
"""
Experiment-Kommandozeile für Streaming-PCA

Unterbefehle:
  recover   - Monte-Carlo-Rekonstruktion im Spiked-Modell (Erfolgsquote pro Trial)
  scaling   - minimale Samplezahl pro p (Streaming und Batch), log-log-Steigung
  phase     - Erfolgsquote über ein (sigma, n)-Gitter
  realdata  - erklärte Varianz über die Blöcke für eine docword-Datei
  diagnose  - Diagnosen zu Konzentration, Initialisierung und Rekursion

Alle Ausgaben sind CSV (stdout oder --out), Logs gehen nach stderr.
"""

import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import config
from algorithm import (BlockSchedule, block_orthogonal_iteration, block_power_method_rank1, boosted_recovery,
                       empirical_schedule, manual_schedule, theorem1_schedule, theorem2_schedule)
from baseline import batch_pca, batch_pca_on_matrix
from errors import InsufficientSamplesError, StreamingPCAError, ValidationError
from metrics import principal_angle_distance, rank1_recovery_error
from model import ModelConfig, SpikedModel, linspace_lambdas, load_model_config, make_model, validate_lambdas
from perturbation import run_underparameterized
from rng import derive_seed, role_rng
from stream import (ORIENTATIONS, SampleStream, default_batch_size, parse_bag_of_words, reopen_for_evaluation,
                    stream_from_corpus, stream_from_model)
from theory import concentration_scaling, initialization_overlap_stats, recursion_grid_check

logger = logging.getLogger(__name__)

SCHEDULE_MODES = ('auto', 'theorem1', 'theorem2', 'empirical', 'manual')
DIAGNOSTICS = ('concentration', 'init', 'recursion')


# ---------------------------------------------------------------------------
# Hilfsfunktionen

def run_parallel(func: Callable, items: Sequence) -> List:
    """Führt func für alle items auf SPCA_THREADS Threads aus; Reihenfolge bleibt erhalten"""
    workers = config.thread_count()
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def trial_seeds(seed: int, trials: int) -> List[int]:
    return [derive_seed(seed, "trial", i) for i in range(trials)]


def write_csv(frame: pd.DataFrame, out: Optional[str] = None):
    if out:
        frame.to_csv(out, index=False, encoding='utf-8', float_format=config.CSV_FLOAT_FORMAT)
        logger.info(f"CSV gespeichert als: {out}")
    else:
        frame.to_csv(sys.stdout, index=False, float_format=config.CSV_FLOAT_FORMAT)


def geometric_grid(n_start: int, n_cap: int, factor: float = config.SCALING_GRID_FACTOR) -> List[int]:
    """Aufsteigendes n-Gitter n_start·factor^j bis einschließlich n_cap"""
    if n_start < 1 or n_cap < n_start:
        raise ValidationError(f"Ungültiges Gitter: n_start={n_start}, n_cap={n_cap}")
    values = set()
    v = float(n_start)
    while v < n_cap:
        values.add(int(math.ceil(v)))
        v *= factor
    values.add(int(n_cap))
    return sorted(values)


# ---------------------------------------------------------------------------
# Rekonstruktionsexperiment (recover)

class RecoveryExperiment:
    """Ein Satz unabhängiger Trials mit festem Schedule"""

    def __init__(self, p: int, k: int, lambdas: Sequence[float], sigma: float, eps: float,
                 schedule_mode: str = 'auto', n: Optional[int] = None,
                 block_size: Optional[int] = None, block_count: Optional[int] = None,
                 c_B: float = config.DEFAULT_C_B, c_T: float = config.DEFAULT_C_T,
                 boost: int = 1, seed: int = config.DEFAULT_SEED,
                 fixed_model: Optional[SpikedModel] = None):
        self.p = p
        self.k = k
        self.lambdas = validate_lambdas(lambdas)
        self.sigma = sigma
        self.eps = eps
        self.n = n
        self.boost = boost
        self.seed = seed
        self.fixed_model = fixed_model

        r = len(self.lambdas)
        if not 1 <= k <= p:
            raise ValidationError(f"Erwartet 1 ≤ k ≤ p, erhalten: k={k}, p={p}")
        if k > r:
            raise ValidationError(f"k={k} größer als Modellrang r={r}")
        if not 0.0 < eps < 1.0:
            raise ValidationError(f"eps muss in (0, 1) liegen, erhalten: {eps}")
        if boost < 1:
            raise ValidationError(f"--boost muss ≥ 1 sein, erhalten: {boost}")
        self.mode = 'underparameterized' if k < r else 'standard'
        if self.mode == 'underparameterized' and boost > 1:
            raise ValidationError("Boosting ist im unterparametrisierten Modus nicht verfügbar")
        self.rank1 = (k == 1 and self.mode == 'standard')
        self.schedule = self._build_schedule(schedule_mode, block_size, block_count, c_B, c_T)
        self.eval_block = self.schedule.block_size if boost > 1 else 0

    def _build_schedule(self, mode: str, block_size, block_count, c_B, c_T) -> BlockSchedule:
        # im unterparametrisierten Modus bestimmt λ_r den Schedule
        lambda_min = self.lambdas[-1] if self.mode == 'underparameterized' else self.lambdas[self.k - 1]
        if mode == 'auto':
            if self.n is not None:
                mode = 'empirical'
            elif block_size is not None and block_count is not None:
                mode = 'manual'
            else:
                mode = 'theorem1' if self.rank1 and len(self.lambdas) == 1 else 'theorem2'

        if mode == 'theorem1':
            if not self.rank1:
                raise ValidationError("theorem1 gilt nur für k = 1")
            return theorem1_schedule(self.p, self.sigma, self.eps, c_B, c_T)
        if mode == 'theorem2':
            return theorem2_schedule(self.p, self.k, self.sigma, lambda_min, self.eps, c_B, c_T)
        if mode == 'empirical':
            if self.n is None:
                raise ValidationError("Der empirische Schedule braucht --n")
            return empirical_schedule(self.n, self.p)
        if mode == 'manual':
            if block_size is None or block_count is None:
                raise ValidationError("Der manuelle Schedule braucht --block-size und --blocks")
            return manual_schedule(block_size, block_count)
        raise ValidationError(f"Unbekannter Schedule-Modus '{mode}'")

    @property
    def stream_length(self) -> int:
        base = self.n if self.n is not None else self.schedule.total_samples
        return base + self.eval_block

    def model_for(self, trial_seed: int) -> SpikedModel:
        if self.fixed_model is not None:
            return self.fixed_model
        return make_model(self.p, self.lambdas, self.sigma, role_rng(trial_seed, "model"))

    def run_trial(self, item: Tuple[int, int]) -> dict:
        trial, trial_seed = item
        model = self.model_for(trial_seed)
        stream = stream_from_model(model, self.stream_length, trial_seed)
        if self.mode == 'underparameterized':
            report, distance = run_underparameterized(model, self.k, self.schedule, trial_seed, stream=stream)
        else:
            if self.boost > 1:
                report = boosted_recovery(stream, self.k, self.schedule, self.boost, self.eval_block,
                                          seed=trial_seed)
            elif self.rank1:
                report = block_power_method_rank1(stream, self.schedule, trial_seed)
            else:
                report = block_orthogonal_iteration(stream, self.k, self.schedule, trial_seed)
            if self.rank1:
                distance = rank1_recovery_error(report.final.vector, model.U[:, 0])
            else:
                distance = principal_angle_distance(model.U, report.final.columns)

        return {
            'trial': trial,
            'seed': trial_seed,
            'final_distance': distance,
            'success': int(distance <= self.eps),
            'samples_used': report.stream_samples,
            'B': self.schedule.block_size,
            'T': self.schedule.block_count,
            'mode': self.mode,
        }

    def run(self, trials: int) -> pd.DataFrame:
        if trials < 1:
            raise ValidationError(f"trials muss ≥ 1 sein, erhalten: {trials}")
        logger.info(f"Starte {trials} Trials: p={self.p}, k={self.k}, B={self.schedule.block_size}, "
                    f"T={self.schedule.block_count} ({self.schedule.provenance})")
        items = list(enumerate(trial_seeds(self.seed, trials)))
        try:
            rows = run_parallel(self.run_trial, items)
        except StreamingPCAError as e:
            logger.error(f"Fehler im Trial-Lauf: {e}")
            raise
        frame = pd.DataFrame(rows, columns=['trial', 'seed', 'final_distance', 'success',
                                            'samples_used', 'B', 'T', 'mode'])
        logger.info(f"Erfolgsquote: {frame['success'].mean():.3f} (eps={self.eps})")
        return frame


# ---------------------------------------------------------------------------
# Rang-1-Erfolgsquoten (scaling, phase)

def rank1_trial_success(p: int, sigma: float, eps: float, n: int, trial_seed: int,
                        method: str = 'streaming') -> bool:
    model = make_model(p, [1.0], sigma, role_rng(trial_seed, "model"))
    stream = stream_from_model(model, n, trial_seed)
    if method == 'batch':
        q = batch_pca(stream, 1, seed=trial_seed).basis.columns[:, 0]
    else:
        q = block_power_method_rank1(stream, empirical_schedule(n, p), trial_seed).final.vector
    return rank1_recovery_error(q, model.U[:, 0]) <= eps


def success_fraction(p: int, sigma: float, eps: float, n: int, trials: int,
                     seed: int = config.DEFAULT_SEED, method: str = 'streaming') -> float:
    """Anteil erfolgreicher Trials bei n Samples; n < T (inkl. n = 0) zählt als 0"""
    try:
        empirical_schedule(n, p)
    except InsufficientSamplesError:
        return 0.0
    outcomes = run_parallel(lambda s: rank1_trial_success(p, sigma, eps, n, s, method),
                            trial_seeds(seed, trials))
    return float(np.mean(outcomes))


def minimal_samples(p: int, sigma: float, eps: float, target: float, trials: int,
                    seed: int = config.DEFAULT_SEED, method: str = 'streaming',
                    n_start: Optional[int] = None, n_cap: int = config.SCALING_N_CAP) -> Tuple[int, bool]:
    """Kleinstes n im geometrischen Gitter mit Erfolgsquote ≥ target; (n, saturated)"""
    start = n_start or max(config.SCALING_N_MIN, math.ceil(math.log(max(p, 2))))
    grid = geometric_grid(start, max(start, n_cap))
    cache = {}

    def reached(j: int) -> bool:
        if j not in cache:
            fraction = success_fraction(p, sigma, eps, grid[j], trials, seed, method)
            logger.debug(f"{method}: p={p}, n={grid[j]}, Erfolgsquote {fraction:.3f}")
            cache[j] = fraction >= target
        return cache[j]

    # exponentielle Suche nach oben, danach Bisektion zwischen lo (verfehlt) und hi (erreicht)
    lo, hi = -1, None
    j, step, last = 0, 1, len(grid) - 1
    while True:
        if reached(j):
            hi = j
            break
        lo = j
        if j == last:
            break
        j = min(j + step, last)
        step *= 2
    if hi is None:
        logger.warning(f"{method}: Ziel {target} für p={p} bis n={grid[last]} nicht erreicht")
        return grid[last], True
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if reached(mid):
            hi = mid
        else:
            lo = mid
    return grid[hi], False


def loglog_slope(ps: Sequence[int], ns: Sequence[float]) -> float:
    if len(ps) < 2:
        return float('nan')
    return float(np.polyfit(np.log(ps), np.log(ns), 1)[0])


def scaling_table(ps: Sequence[int], sigma: float, eps: float, target: float, trials: int,
                  seed: int = config.DEFAULT_SEED, with_batch: bool = True,
                  n_cap: int = config.SCALING_N_CAP) -> pd.DataFrame:
    rows = []
    for p in ps:
        n_min, saturated = minimal_samples(p, sigma, eps, target, trials, seed, 'streaming', n_cap=n_cap)
        row = {'p': p, 'n_min': n_min, 'saturated': int(saturated), 'n_batch': None, 'batch_saturated': None}
        if with_batch and p <= config.ORACLE_MAX_DIM:
            n_batch, batch_saturated = minimal_samples(p, sigma, eps, target, trials, seed, 'batch', n_cap=n_cap)
            row['n_batch'] = n_batch
            row['batch_saturated'] = int(batch_saturated)
        elif with_batch:
            logger.warning(f"Batch-Spalte für p={p} ausgelassen (Orakel-Grenze {config.ORACLE_MAX_DIM})")
        rows.append(row)
        logger.info(f"p={p}: n_min={n_min}{' (gesättigt)' if saturated else ''}")

    frame = pd.DataFrame(rows, columns=['p', 'n_min', 'saturated', 'n_batch', 'batch_saturated'])
    fit = frame[frame['saturated'] == 0]
    slope = loglog_slope(fit['p'].tolist(), fit['n_min'].tolist())
    frame['loglog_slope'] = slope
    if not math.isnan(slope):
        logger.info(f"log-log-Steigung n_min über p: {slope:.3f}")
    return frame


def phase_table(sigmas: Sequence[float], ns: Sequence[int], p: int, eps: float, trials: int,
                seed: int = config.DEFAULT_SEED) -> pd.DataFrame:
    rows = []
    for sigma in sigmas:
        for n in ns:
            fraction = success_fraction(p, sigma, eps, n, trials, seed)
            rows.append({'sigma': sigma, 'n': n, 'success_fraction': fraction})
            logger.debug(f"sigma={sigma}, n={n}: {fraction:.3f}")
    return pd.DataFrame(rows, columns=['sigma', 'n', 'success_fraction'])


# ---------------------------------------------------------------------------
# Erklärte Varianz über die Blöcke (realdata)

def experiment_curve(source: SampleStream, k: int, seed: int = config.DEFAULT_SEED,
                     include_batch: bool = True, schedule: Optional[BlockSchedule] = None) -> pd.DataFrame:
    """
    Streaming-Lauf mit allen Block-Iterierten, dann ein Auswertungsdurchlauf
    über alle Daten. Im selben Durchlauf wird (für p ≤ Orakel-Grenze) die
    Gram-Matrix akkumuliert; bei jedem τ·B wird Batch-PCA auf den ersten
    τ·B Samples gerechnet.
    """
    p = source.dim
    n = getattr(source, 'n', None)
    if schedule is None:
        if n is None:
            raise ValidationError("Ohne bekannte Samplezahl wird ein expliziter Schedule benötigt")
        schedule = empirical_schedule(n, p)
    B, T = schedule.block_size, schedule.block_count

    report = block_orthogonal_iteration(source, k, schedule, seed, keep_iterates=True)
    evaluation = reopen_for_evaluation(source)

    with_batch = include_batch and p <= config.ORACLE_MAX_DIM
    if include_batch and not with_batch:
        logger.warning(f"Batch-Spalte ausgelassen: p={p} > {config.ORACLE_MAX_DIM}")

    stacked = np.hstack(report.iterates)
    bounds = np.arange(0, T * k, k)
    numerators = np.zeros(T)
    denominator = 0.0
    gram = np.zeros((p, p)) if with_batch else None
    batch_bases: List[np.ndarray] = []
    chunk = default_batch_size(p)
    seen = 0
    while True:
        limit = chunk
        if with_batch and len(batch_bases) < T:
            limit = min(chunk, (len(batch_bases) + 1) * B - seen)
        x = evaluation.take(limit)
        if x.shape[0] == 0:
            break
        numerators += np.add.reduceat(np.sum((x @ stacked) ** 2, axis=0), bounds)
        denominator += float(np.einsum('ij,ij->', x, x))
        if with_batch:
            gram += x.T @ x
        seen += x.shape[0]
        del x
        if with_batch and len(batch_bases) < T and seen == (len(batch_bases) + 1) * B:
            batch_bases.append(batch_pca_on_matrix(gram / seen, k, seed).basis.columns)

    if seen == 0 or denominator == 0.0:
        raise ValidationError("Auswertungsdurchlauf ohne Energie (leere Daten oder nur Nullvektoren)")

    streaming = np.minimum(numerators / denominator, 1.0)
    batch: List[Optional[float]] = [None] * T
    if with_batch:
        for tau, V in enumerate(batch_bases):
            batch[tau] = float(min(np.trace(V.T @ gram @ V) / denominator, 1.0))

    frame = pd.DataFrame({
        'block': np.arange(1, T + 1),
        'samples_consumed': np.arange(1, T + 1) * B,
        'explained_variance_streaming': streaming,
        'explained_variance_batch': batch,
    })
    logger.info(f"Erklärte Varianz nach {T} Blöcken: {streaming[-1]:.4f}"
                + (f" (Batch: {batch[-1]:.4f})" if with_batch and batch[-1] is not None else ""))
    return frame


# ---------------------------------------------------------------------------
# Unterbefehle

def cmd_recover(args) -> pd.DataFrame:
    fixed_model = None
    if args.model_config:
        cfg: ModelConfig = load_model_config(args.model_config)
        fixed_model = cfg.build()
        p, lambdas, sigma = cfg.p, cfg.lambdas, cfg.sigma
    else:
        p, sigma = args.p, args.sigma
        lambdas = args.lambdas if args.lambdas else linspace_lambdas(args.k)
    experiment = RecoveryExperiment(
        p=p, k=args.k, lambdas=lambdas, sigma=sigma, eps=args.eps,
        schedule_mode=args.schedule, n=args.n, block_size=args.block_size, block_count=args.blocks,
        c_B=args.c_b, c_T=args.c_t, boost=args.boost, seed=args.seed, fixed_model=fixed_model,
    )
    return experiment.run(args.trials)


def cmd_scaling(args) -> pd.DataFrame:
    return scaling_table(args.p_list, args.sigma, args.eps, args.target, args.trials, args.seed,
                         with_batch=not args.no_batch, n_cap=args.n_cap)


def cmd_phase(args) -> pd.DataFrame:
    return phase_table(args.sigmas, args.ns, args.p, args.eps, args.trials, args.seed)


def cmd_realdata(args) -> pd.DataFrame:
    try:
        corpus = parse_bag_of_words(args.docword)
    except OSError as e:
        logger.error(f"Fehler beim Lesen von {args.docword}: {e}")
        raise ValidationError(f"Datei nicht lesbar: {args.docword} ({e})") from e
    stream = stream_from_corpus(corpus, args.orientation, args.normalize)
    return experiment_curve(stream, args.k, args.seed, include_batch=not args.no_batch)


def cmd_diagnose(args) -> pd.DataFrame:
    if args.lemma == 'recursion':
        result = recursion_grid_check(max_tau=args.max_tau)
        return pd.DataFrame([{'cells': result.cells, 'passed': result.passed,
                              'failed': result.failed, 'max_excess': result.max_excess}])
    if args.lemma == 'init':
        return initialization_overlap_stats(args.p, args.k, args.trials, args.seed).to_frame()
    lambdas = args.lambdas if args.lambdas else [1.0]
    return concentration_scaling(args.p, args.sigma, args.B, args.trials, args.seed, lambdas)


# ---------------------------------------------------------------------------
# Argumente

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Ganzzahl erwartet: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"muss ≥ 1 sein: {value}")
    return value


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Ganzzahl erwartet: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"muss ≥ 0 sein: {value}")
    return value


def _float_list(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"kommagetrennte Zahlen erwartet: {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("Liste darf nicht leer sein")
    return values


def _int_list(text: str) -> List[int]:
    values = _float_list(text)
    if any(v != int(v) or v < 0 for v in values):
        raise argparse.ArgumentTypeError(f"nichtnegative Ganzzahlen erwartet: {text!r}")
    return [int(v) for v in values]


def _ascending_int_list(text: str) -> List[int]:
    values = _int_list(text)
    if any(v < 1 for v in values) or any(a >= b for a, b in zip(values, values[1:])):
        raise argparse.ArgumentTypeError(f"aufsteigende positive Ganzzahlen erwartet: {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=config.DEFAULT_SEED, help='Basis-Seed')
    common.add_argument('--out', help='CSV-Datei (Standard: stdout)')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='Debug-Logs')
    verbosity.add_argument('--quiet', action='store_true', help='nur Warnungen und Fehler')

    parser = argparse.ArgumentParser(description='Streaming-PCA: Block-Potenzmethode und Experimente')
    sub = parser.add_subparsers(dest='command', required=True)

    rec = sub.add_parser('recover', parents=[common], help='Monte-Carlo-Rekonstruktion')
    rec.add_argument('--p', type=_positive_int, default=100)
    rec.add_argument('--k', type=_positive_int, default=1)
    rec.add_argument('--sigma', type=float, default=0.5)
    rec.add_argument('--lambdas', type=_float_list, help='Spikes, absteigend, λ₁ = 1 (Standard: gleichabständig)')
    rec.add_argument('--eps', type=float, default=0.05)
    rec.add_argument('--schedule', choices=SCHEDULE_MODES, default='auto')
    rec.add_argument('--block-size', type=_positive_int)
    rec.add_argument('--blocks', type=_positive_int)
    rec.add_argument('--c-b', type=float, default=config.DEFAULT_C_B)
    rec.add_argument('--c-t', type=float, default=config.DEFAULT_C_T)
    rec.add_argument('--n', type=_nonnegative_int, help='Samples pro Trial')
    rec.add_argument('--trials', type=_positive_int, default=config.DEFAULT_TRIALS)
    rec.add_argument('--boost', type=_positive_int, default=1, help='Anzahl paralleler Instanzen')
    rec.add_argument('--model-config', help='Modell aus key=value- oder JSON-Datei')
    rec.set_defaults(handler=cmd_recover)

    sca = sub.add_parser('scaling', parents=[common], help='minimale Samplezahl pro p')
    sca.add_argument('--p-list', type=_ascending_int_list, default=[50, 100, 200, 400])
    sca.add_argument('--sigma', type=float, default=0.5)
    sca.add_argument('--eps', type=float, default=0.05)
    sca.add_argument('--target', type=float, default=0.5, help='Ziel-Erfolgsquote')
    sca.add_argument('--trials', type=_positive_int, default=config.DEFAULT_TRIALS)
    sca.add_argument('--n-cap', type=_positive_int, default=config.SCALING_N_CAP)
    sca.add_argument('--no-batch', action='store_true', help='Batch-Spalte weglassen')
    sca.set_defaults(handler=cmd_scaling)

    pha = sub.add_parser('phase', parents=[common], help='Phasendiagramm (sigma, n)')
    pha.add_argument('--sigmas', type=_float_list, default=[0.1, 0.25, 0.5, 1.0, 2.0])
    pha.add_argument('--ns', type=_int_list, default=[250, 500, 1000, 2000, 4000])
    pha.add_argument('--p', type=_positive_int, default=100)
    pha.add_argument('--eps', type=float, default=0.05)
    pha.add_argument('--trials', type=_positive_int, default=config.DEFAULT_TRIALS)
    pha.set_defaults(handler=cmd_phase)

    real = sub.add_parser('realdata', parents=[common], help='erklärte Varianz auf docword-Daten')
    real.add_argument('--docword', required=True, help='UCI docword-Datei (optional .gz)')
    real.add_argument('--k', type=_positive_int, default=7)
    real.add_argument('--orientation', choices=sorted(ORIENTATIONS), default='words')
    real.add_argument('--normalize', action='store_true', help='Samples auf Länge 1 normieren')
    real.add_argument('--no-batch', action='store_true', help='Batch-Spalte weglassen')
    real.set_defaults(handler=cmd_realdata)

    dia = sub.add_parser('diagnose', parents=[common], help='Diagnosen der analytischen Schranken')
    dia.add_argument('--lemma', choices=DIAGNOSTICS, required=True)
    dia.add_argument('--p', type=_positive_int, default=20)
    dia.add_argument('--k', type=_positive_int, default=1)
    dia.add_argument('--sigma', type=float, default=0.5)
    dia.add_argument('--lambdas', type=_float_list)
    dia.add_argument('--B', type=_ascending_int_list, default=[500, 1000, 2000], help='Blockgrößen')
    dia.add_argument('--trials', type=_positive_int, default=config.DEFAULT_TRIALS)
    dia.add_argument('--max-tau', type=_positive_int, default=100)
    dia.set_defaults(handler=cmd_diagnose)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Hauptfunktion"""
    parser = build_parser()
    args = parser.parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=config.LOG_FORMAT, stream=sys.stderr, force=True)

    try:
        frame = args.handler(args)
        write_csv(frame, args.out)
    except StreamingPCAError as e:
        logger.error(f"Abbruch: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
