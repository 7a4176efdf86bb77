import sys
from pathlib import Path

import pytest

from garfield.corpus import dedupe_documents, load_corpus

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def m1_paths():
    return FIXTURES / "m1_journals.jsonl", FIXTURES / "m1_documents.jsonl"


@pytest.fixture()
def m1_corpus(m1_paths):
    corpus, issues = load_corpus(*m1_paths)
    assert issues == []
    corpus, _ = dedupe_documents(corpus)
    return corpus
