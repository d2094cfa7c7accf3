import hashlib

import pytest

from swankv.infrastructure.adapters.corpus_bytes import ByteCorpusReader
from swankv.infrastructure.exceptions.storage import FormatError, StorageError


def test_every_byte_is_a_token(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_bytes("héllo".encode())

    corpus = ByteCorpusReader().read(path)

    assert corpus.tokens == (104, 195, 169, 108, 108, 111)
    digest = hashlib.sha256("héllo".encode()).hexdigest()[:12]
    assert corpus.corpus_id == f"tiny.txt:{digest}"


def test_bundled_corpus():
    corpus = ByteCorpusReader().read()

    assert len(corpus) > 4096
    assert corpus.corpus_id.startswith("corpus.txt:")
    assert all(0 <= t < 256 for t in corpus.tokens)


def test_window_wraps_around(tmp_path):
    path = tmp_path / "abc.txt"
    path.write_bytes(b"abc")

    corpus = ByteCorpusReader().read(path)

    assert corpus.window(2, 4) == (99, 97, 98, 99)


def test_empty_corpus(tmp_path):
    path = tmp_path / "empty.txt"
    path.touch()

    with pytest.raises(FormatError):
        ByteCorpusReader().read(path)


def test_missing_corpus(tmp_path):
    with pytest.raises(StorageError):
        ByteCorpusReader().read(tmp_path / "absent.txt")
