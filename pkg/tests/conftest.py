import pytest

from corpusforge.store import Store

# Seven lines: five clean sentences, one duplicate, one empty.
DEMO_CORPUS = (
    b"Good morning.\n"
    b"The cat sat.\n"
    b"A fine day indeed.\n"
    b"We shipped the new release.\n"
    b"The team reviewed every single line today.\n"
    b"Good morning.\n"
    b"\n"
)


@pytest.fixture
def store(tmp_path):
    s = Store(str(tmp_path / "test.db"))
    yield s
    s.close()


@pytest.fixture
def mem_store():
    s = Store(":memory:")
    yield s
    s.close()


def make_demo_project(store, project_id="demo", config=None):
    store.create_project(name="Demo", config=config, project_id=project_id)
    store.ingest_corpus(project_id, DEMO_CORPUS, "txt")
    return project_id
