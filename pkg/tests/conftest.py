import pytest

from dissonance.corpus import generate_corpus, read_manifest
from dissonance.data import EncodedCorpus


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    generate_corpus(out, seed=42)
    return out


@pytest.fixture(scope="session")
def manifest(corpus_dir):
    return read_manifest(corpus_dir / "manifest.jsonl")


@pytest.fixture(scope="session")
def encoded_corpus(corpus_dir, manifest):
    return EncodedCorpus(manifest, corpus_dir, d=64)
