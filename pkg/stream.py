"""
Single-Pass-Quellen für Samples

Ein SampleStream liefert jedes Sample höchstens einmal und kann nicht
zurückgespult werden. Für die Auswertung (zweiter Durchlauf) wird eine neue,
als evaluation_only markierte Instanz über reopen_for_evaluation erzeugt;
Trainer lehnen solche Streams ab.

Rückgabewerte von take() sind schreibgeschützte Sichten auf interne Puffer
und nur bis zum nächsten take() gültig.
"""

import csv
import gzip
import logging
import os
import threading
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np
import pandas as pd

import config
from errors import ContractViolationError, NotReopenableError, ParseError, ValidationError
from model import SpikedModel, draw_block
from rng import derive_seed, make_rng

logger = logging.getLogger(__name__)

ORIENTATIONS = {
    'words': 'words',
    'words-as-samples': 'words',
    'docs': 'docs',
    'docs-as-samples': 'docs',
}


def default_batch_size(p: int) -> int:
    """Erzeugungs-Batch, so dass ein Puffer höchstens CHUNK_BUFFER_NUMBERS Zahlen hält"""
    return max(1, config.CHUNK_BUFFER_NUMBERS // max(1, p))


class SampleStream:
    """Basisklasse: ein Verbraucher, ein Durchlauf, kein Zurückspulen"""

    def __init__(self, dim: int, evaluation_only: bool = False):
        if dim < 1:
            raise ValidationError(f"Dimension muss ≥ 1 sein, erhalten: {dim}")
        self.dim = dim
        self.evaluation_only = evaluation_only
        self.consumed_count = 0
        self._exhausted = False
        self._lock = threading.Lock()

    @property
    def exhausted(self) -> bool:
        return self._exhausted

    def _produce(self, m: int) -> Optional[np.ndarray]:
        """Liefert 1..m neue Samples oder None am Ende"""
        raise NotImplementedError

    def _fresh(self) -> 'SampleStream':
        raise NotReopenableError(f"{type(self).__name__} kann nicht erneut geöffnet werden")

    def take(self, m: int) -> np.ndarray:
        """Bis zu m Samples als (m', dim)-Array; m' = 0 heißt Ende des Streams"""
        if m < 1:
            raise ValidationError(f"take braucht m ≥ 1, erhalten: {m}")
        if not self._lock.acquire(blocking=False):
            raise ContractViolationError("Gleichzeitiger Zugriff auf einen SampleStream")
        try:
            if self._exhausted:
                return np.empty((0, self.dim))
            block = self._produce(m)
            if block is None or block.shape[0] == 0:
                self._exhausted = True
                return np.empty((0, self.dim))
            self.consumed_count += block.shape[0]
            block.setflags(write=False)
            return block
        finally:
            self._lock.release()

    def next(self) -> Optional[np.ndarray]:
        """Nächstes Sample oder None (Ende, dauerhaft)"""
        block = self.take(1)
        if block.shape[0] == 0:
            return None
        return block[0].copy()

    def __iter__(self) -> Iterator[np.ndarray]:
        while True:
            block = self.take(max(1, default_batch_size(self.dim)))
            if block.shape[0] == 0:
                return
            for row in block:
                yield row.copy()

    def reopen(self) -> 'SampleStream':
        return self._fresh()


class ModelSampleStream(SampleStream):
    """n Samples aus einem SpikedModel; Reihenfolge hängt nur von (seed, batch_size) ab"""

    def __init__(self, model: SpikedModel, n: int, seed: int,
                 batch_size: Optional[int] = None, evaluation_only: bool = False):
        super().__init__(model.p, evaluation_only)
        if n < 0:
            raise ValidationError(f"n muss ≥ 0 sein, erhalten: {n}")
        self.model = model
        self.n = n
        self.seed = seed
        self.batch_size = batch_size or default_batch_size(model.p)
        self._rng = make_rng(derive_seed(seed, "data"))
        self._buffer: Optional[np.ndarray] = None
        self._position = 0
        self._generated = 0

    def _produce(self, m: int) -> Optional[np.ndarray]:
        if self._buffer is None or self._position >= self._buffer.shape[0]:
            self._buffer = None
            remaining = self.n - self._generated
            if remaining <= 0:
                return None
            size = min(self.batch_size, remaining)
            self._buffer = draw_block(self.model, self._rng, size)
            self._generated += size
            self._position = 0
        start = self._position
        stop = min(start + m, self._buffer.shape[0])
        self._position = stop
        return self._buffer[start:stop]

    def _fresh(self) -> 'ModelSampleStream':
        return ModelSampleStream(self.model, self.n, self.seed, self.batch_size)


class ArraySampleStream(SampleStream):
    """In-Memory-Stream für Tests; einmalig, nicht wieder zu öffnen"""

    def __init__(self, samples):
        data = np.array(samples, dtype=np.float64, ndmin=2)
        if data.size == 0:
            data = data.reshape(0, max(1, data.shape[-1]))
        if not np.all(np.isfinite(data)):
            raise ValidationError("Samples enthalten NaN oder Inf")
        super().__init__(data.shape[1])
        self._data = data
        self._position = 0

    def _produce(self, m: int) -> Optional[np.ndarray]:
        if self._data is None or self._position >= self._data.shape[0]:
            self._data = None
            return None
        start = self._position
        self._position = min(start + m, self._data.shape[0])
        return self._data[start:self._position]


# ---------------------------------------------------------------------------
# Bag-of-Words (UCI docword)

@dataclass(eq=False)
class BagOfWordsCorpus:
    doc_count: int
    vocab_size: int
    nonzero_count: int
    doc_ids: np.ndarray
    word_ids: np.ndarray
    counts: np.ndarray
    source: Optional[str] = None

    def __post_init__(self):
        self.doc_ids = np.asarray(self.doc_ids, dtype=np.int64)
        self.word_ids = np.asarray(self.word_ids, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.doc_count < 1 or self.vocab_size < 1:
            raise ValidationError(f"D und W müssen ≥ 1 sein, erhalten: D={self.doc_count}, W={self.vocab_size}")
        if not (len(self.doc_ids) == len(self.word_ids) == len(self.counts)):
            raise ValidationError("Tripel-Spalten haben unterschiedliche Längen")
        if len(self.counts) != self.nonzero_count:
            raise ValidationError(
                f"Anzahl Tripel ({len(self.counts)}) passt nicht zu NNZ={self.nonzero_count}"
            )
        _check_range(self.doc_ids, 1, self.doc_count, "doc_id")
        _check_range(self.word_ids, 1, self.vocab_size, "word_id")
        if len(self.counts) and self.counts.min() < 1:
            raise ValidationError(f"count muss ≥ 1 sein (Tripel {int(np.argmin(self.counts)) + 1})")

    def triples(self) -> Iterator[Tuple[int, int, int]]:
        for d, w, c in zip(self.doc_ids, self.word_ids, self.counts):
            yield int(d), int(w), int(c)

    def dense(self, orientation: str = 'docs') -> np.ndarray:
        """Dichte Matrix (nur für kleine Korpora, Tests)"""
        X = np.zeros((self.doc_count, self.vocab_size))
        np.add.at(X, (self.doc_ids - 1, self.word_ids - 1), self.counts)
        return X if _orientation(orientation) == 'docs' else X.T


def _check_range(ids: np.ndarray, low: int, high: int, name: str):
    if len(ids) == 0:
        return
    bad = np.flatnonzero((ids < low) | (ids > high))
    if len(bad):
        first = int(bad[0])
        raise ValidationError(f"{name}={int(ids[first])} außerhalb [{low}, {high}] (Tripel {first + 1})")


def _orientation(orientation: str) -> str:
    try:
        return ORIENTATIONS[orientation]
    except KeyError:
        raise ValidationError(
            f"Unbekannte Orientierung '{orientation}', erlaubt: {', '.join(sorted(ORIENTATIONS))}"
        ) from None


def _open_text(path: str):
    if path.endswith('.gz'):
        return gzip.open(path, 'rt', encoding='utf-8')
    return open(path, 'r', encoding='utf-8')


def parse_bag_of_words(path: str) -> BagOfWordsCorpus:
    """Liest eine docword-Datei: drei Kopfzeilen D, W, NNZ, danach 'doc word count'-Tripel"""
    logger.info(f"Lese Bag-of-Words-Datei: {path}")
    if not os.path.exists(path):
        raise ValidationError(f"Datei nicht gefunden: {path}")

    header = []
    with _open_text(path) as f:
        for number in range(1, 4):
            line = f.readline()
            try:
                header.append(int(line.strip()))
            except ValueError:
                raise ParseError(number, f"Ganzzahl im Kopf erwartet, erhalten: {line.strip()!r}") from None
    doc_count, vocab_size, nnz = header

    # jede Zeile als ein Feld lesen, Zeilennummer = Index + 4
    try:
        lines = pd.read_csv(
            path, skiprows=3, header=None, names=['line'], sep='\x1f', dtype=str,
            skip_blank_lines=False, quoting=csv.QUOTE_NONE, compression='infer', engine='c',
        )['line']
    except pd.errors.EmptyDataError:
        lines = pd.Series([], dtype=str)

    lines = lines.dropna()
    lines = lines[lines.str.strip() != '']
    parts = lines.str.split(expand=True) if len(lines) else pd.DataFrame(columns=[0, 1, 2])
    if parts.shape[1] > 3:
        extra = parts[parts.iloc[:, 3:].notna().any(axis=1)]
        if len(extra):
            raise ParseError(int(extra.index[0]) + 4, "mehr als drei Felder")
    parts = parts.reindex(columns=[0, 1, 2])
    numbers = parts.apply(pd.to_numeric, errors='coerce')
    bad = numbers.isna().any(axis=1) | (numbers.fillna(0) % 1 != 0).any(axis=1)
    if bad.any():
        index = int(bad.idxmax())
        raise ParseError(index + 4, f"'doc word count' erwartet, erhalten: {lines.loc[index]!r}")

    values = numbers.to_numpy(dtype=np.int64) if len(numbers) else np.zeros((0, 3), dtype=np.int64)
    corpus = BagOfWordsCorpus(
        doc_count=doc_count, vocab_size=vocab_size, nonzero_count=nnz,
        doc_ids=values[:, 0], word_ids=values[:, 1], counts=values[:, 2], source=path,
    )
    logger.info(f"Korpus geladen: D={doc_count}, W={vocab_size}, NNZ={nnz}")
    return corpus


class CorpusSampleStream(SampleStream):
    """
    Samples aus einem Korpus (Dokumente oder Wörter als Samples).

    Die Tripel werden einmalig nach der Sample-Achse gebucketet (Index mit
    O(NNZ) Speicher); pro Sample wird nur ein Vektor der Länge p dicht gemacht.
    """

    def __init__(self, corpus: BagOfWordsCorpus, orientation: str = 'words',
                 normalize: bool = False, batch_size: Optional[int] = None,
                 evaluation_only: bool = False):
        self.orientation = _orientation(orientation)
        if self.orientation == 'docs':
            sample_ids, feature_ids = corpus.doc_ids - 1, corpus.word_ids - 1
            n, dim = corpus.doc_count, corpus.vocab_size
        else:
            sample_ids, feature_ids = corpus.word_ids - 1, corpus.doc_ids - 1
            n, dim = corpus.vocab_size, corpus.doc_count
        super().__init__(dim, evaluation_only)
        self.corpus = corpus
        self.normalize = normalize
        self.n = n
        self.batch_size = batch_size or default_batch_size(dim)

        order = np.argsort(sample_ids, kind='stable')
        self._features = feature_ids[order]
        self._values = corpus.counts[order].astype(np.float64)
        self._offsets = np.concatenate([[0], np.cumsum(np.bincount(sample_ids, minlength=n))])
        self._next_sample = 0

    def _produce(self, m: int) -> Optional[np.ndarray]:
        if self._next_sample >= self.n:
            return None
        start = self._next_sample
        stop = min(start + m, start + self.batch_size, self.n)
        block = np.zeros((stop - start, self.dim))
        for row, sample in enumerate(range(start, stop)):
            lo, hi = self._offsets[sample], self._offsets[sample + 1]
            np.add.at(block[row], self._features[lo:hi], self._values[lo:hi])
            if self.normalize:
                norm = np.linalg.norm(block[row])
                if norm > 0:
                    block[row] /= norm
        self._next_sample = stop
        return block

    def _fresh(self) -> 'CorpusSampleStream':
        return CorpusSampleStream(self.corpus, self.orientation, self.normalize, self.batch_size)


def stream_from_model(model: SpikedModel, n: int, seed: int, batch_size: Optional[int] = None) -> ModelSampleStream:
    return ModelSampleStream(model, n, seed, batch_size)


def stream_from_corpus(corpus: BagOfWordsCorpus, orientation: str = 'words',
                       normalize: bool = False) -> CorpusSampleStream:
    return CorpusSampleStream(corpus, orientation, normalize)


def reopen_for_evaluation(source: SampleStream) -> SampleStream:
    """Frischer Stream über dieselben Daten, markiert als reiner Auswertungsstream"""
    fresh = source.reopen()
    fresh.evaluation_only = True
    return fresh


def ensure_trainable(stream: SampleStream):
    if stream.evaluation_only:
        raise ContractViolationError("Auswertungsstream darf nicht zum Training verwendet werden")
