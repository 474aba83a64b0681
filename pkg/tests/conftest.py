import pytest

from minutesum.corpus import load_corpus, load_tasks
from minutesum.embedding import NgramEmbedder
from minutesum.synthetic import fixture_path


@pytest.fixture(scope="session")
def fixture_corpus():
    return load_corpus(fixture_path("fixture_minutes.jsonl"))


@pytest.fixture(scope="session")
def fixture_tasks():
    return load_tasks(fixture_path("fixture_tasks.json"))


@pytest.fixture
def ngram():
    return NgramEmbedder(dim=256)


@pytest.fixture
def write_jsonl(tmp_path):
    import json

    def _write(records, name="data.jsonl"):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write((rec if isinstance(rec, str) else json.dumps(rec, ensure_ascii=False)) + "\n")
        return path

    return _write
