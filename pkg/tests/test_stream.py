import threading

import numpy as np
import pytest

from conftest import write_docword
from errors import ContractViolationError, NotReopenableError, ParseError, ValidationError
from model import draw_block
from rng import derive_seed, make_rng
from stream import (ArraySampleStream, BagOfWordsCorpus, ModelSampleStream, parse_bag_of_words,
                    reopen_for_evaluation, stream_from_corpus, stream_from_model)


def _drain(stream, chunk):
    parts = []
    while True:
        x = stream.take(chunk)
        if x.shape[0] == 0:
            return np.vstack(parts) if parts else np.empty((0, stream.dim))
        parts.append(x.copy())


def test_model_stream_yields_n_samples(rank1_model):
    stream = stream_from_model(rank1_model, 25, seed=1)
    rows = list(stream)
    assert len(rows) == 25
    assert stream.consumed_count == 25
    assert stream.next() is None
    assert stream.take(5).shape == (0, 20)


def test_model_stream_sequence_independent_of_chunking(rank1_model):
    a = _drain(ModelSampleStream(rank1_model, 100, seed=3, batch_size=16), 7)
    b = _drain(ModelSampleStream(rank1_model, 100, seed=3, batch_size=16), 50)
    np.testing.assert_array_equal(a, b)


def test_model_stream_matches_block_draws(rank1_model):
    stream = ModelSampleStream(rank1_model, 10, seed=4, batch_size=10)
    expected = draw_block(rank1_model, make_rng(derive_seed(4, "data")), 10)
    np.testing.assert_array_equal(_drain(stream, 3), expected)


def test_take_returns_read_only_views(rank1_model):
    x = stream_from_model(rank1_model, 5, seed=0).take(3)
    with pytest.raises(ValueError):
        x[0, 0] = 1.0


def test_take_rejects_zero(rank1_model):
    with pytest.raises(ValidationError):
        stream_from_model(rank1_model, 5, seed=0).take(0)


def test_concurrent_take_is_contract_violation(rank1_model):
    stream = stream_from_model(rank1_model, 5, seed=0)
    stream._lock.acquire()
    try:
        with pytest.raises(ContractViolationError):
            stream.take(1)
    finally:
        stream._lock.release()
    assert stream.take(1).shape == (1, 20)


def test_reopen_for_evaluation_replays_same_samples(rank1_model):
    source = stream_from_model(rank1_model, 40, seed=8)
    first = _drain(source, 9)
    again = reopen_for_evaluation(source)
    assert again.evaluation_only
    np.testing.assert_array_equal(_drain(again, 13), first)


def test_array_stream_not_reopenable():
    stream = ArraySampleStream(np.eye(3))
    assert _drain(stream, 2).shape == (3, 3)
    with pytest.raises(NotReopenableError):
        reopen_for_evaluation(stream)


def test_array_stream_rejects_nan():
    with pytest.raises(ValidationError):
        ArraySampleStream([[1.0, np.inf]])


def test_parse_bag_of_words(tmp_path):
    path = write_docword(tmp_path / 'docword.txt', 2, 3, [(1, 1, 2), (1, 3, 1), (2, 2, 5)])
    corpus = parse_bag_of_words(path)
    assert (corpus.doc_count, corpus.vocab_size, corpus.nonzero_count) == (2, 3, 3)
    assert list(corpus.triples()) == [(1, 1, 2), (1, 3, 1), (2, 2, 5)]
    np.testing.assert_array_equal(corpus.dense('docs'), [[2, 0, 1], [0, 5, 0]])


def test_parse_bag_of_words_gzip(tmp_path):
    path = write_docword(tmp_path / 'docword.txt.gz', 2, 2, [(1, 2, 1), (2, 1, 3)], gz=True)
    corpus = parse_bag_of_words(path)
    np.testing.assert_array_equal(corpus.dense('docs'), [[0, 1], [3, 0]])


def test_parse_bag_of_words_bad_header(tmp_path):
    path = tmp_path / 'docword.txt'
    path.write_text("2\nzwei\n3\n", encoding='utf-8')
    with pytest.raises(ParseError) as excinfo:
        parse_bag_of_words(str(path))
    assert excinfo.value.line == 2


def test_parse_bag_of_words_bad_triple_line(tmp_path):
    path = tmp_path / 'docword.txt'
    path.write_text("2\n3\n2\n1 1 2\n2 x 1\n", encoding='utf-8')
    with pytest.raises(ParseError) as excinfo:
        parse_bag_of_words(str(path))
    assert excinfo.value.line == 5


def test_parse_bag_of_words_nnz_mismatch(tmp_path):
    path = write_docword(tmp_path / 'docword.txt', 2, 3, [(1, 1, 2)])
    path_text = open(path, encoding='utf-8').read().replace("\n1\n", "\n2\n", 1)
    open(path, 'w', encoding='utf-8').write(path_text)
    with pytest.raises(ValidationError):
        parse_bag_of_words(path)


def test_parse_bag_of_words_id_out_of_range(tmp_path):
    path = write_docword(tmp_path / 'docword.txt', 2, 3, [(1, 4, 2)])
    with pytest.raises(ValidationError):
        parse_bag_of_words(path)


def test_parse_bag_of_words_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        parse_bag_of_words(str(tmp_path / 'fehlt.txt'))


def test_corpus_stream_orientations():
    corpus = BagOfWordsCorpus(2, 3, 3, [1, 1, 2], [1, 3, 2], [2, 1, 5])
    docs = _drain(stream_from_corpus(corpus, 'docs-as-samples'), 10)
    words = _drain(stream_from_corpus(corpus, 'words'), 10)
    np.testing.assert_array_equal(docs, corpus.dense('docs'))
    np.testing.assert_array_equal(words, corpus.dense('docs').T)


def test_corpus_stream_normalize_keeps_zero_rows():
    corpus = BagOfWordsCorpus(3, 2, 2, [1, 1], [1, 2], [3, 4])
    rows = _drain(stream_from_corpus(corpus, 'docs', normalize=True), 10)
    np.testing.assert_allclose(rows, [[0.6, 0.8], [0.0, 0.0], [0.0, 0.0]])


def test_corpus_stream_rejects_unknown_orientation():
    corpus = BagOfWordsCorpus(1, 1, 1, [1], [1], [1])
    with pytest.raises(ValidationError):
        stream_from_corpus(corpus, 'rows')


def test_corpus_stream_reopens():
    corpus = BagOfWordsCorpus(2, 2, 2, [1, 2], [1, 2], [1, 1])
    source = stream_from_corpus(corpus, 'docs')
    first = _drain(source, 1)
    np.testing.assert_array_equal(_drain(reopen_for_evaluation(source), 2), first)


def test_stream_iteration_from_worker_thread(rank1_model):
    stream = stream_from_model(rank1_model, 30, seed=2)
    collected = []
    worker = threading.Thread(target=lambda: collected.extend(stream))
    worker.start()
    worker.join()
    assert len(collected) == 30
