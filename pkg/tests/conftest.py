import numpy as np
import pytest

from model import make_model
from rng import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def rank1_model():
    return make_model(20, [1.0], 0.1, make_rng(7))


@pytest.fixture
def rank3_model():
    return make_model(30, [1.0, 0.8, 0.6], 0.1, make_rng(11))


def orthonormal(p, k, seed=0):
    """Zufällige p×k-Matrix mit orthonormalen Spalten"""
    Q, _ = np.linalg.qr(make_rng(seed).standard_normal((p, k)))
    return Q


def write_docword(path, doc_count, vocab_size, triples, gz=False):
    lines = [str(doc_count), str(vocab_size), str(len(triples))]
    lines += [f"{d} {w} {c}" for d, w, c in triples]
    text = "\n".join(lines) + "\n"
    if gz:
        import gzip
        with gzip.open(path, 'wt', encoding='utf-8') as f:
            f.write(text)
    else:
        path.write_text(text, encoding='utf-8')
    return str(path)
