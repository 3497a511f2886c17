import pytest

from provisim.trial.fixtures import write_fixture_corpus


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    """Synthetic face corpus shared by trial and acceptance tests."""
    corpus = tmp_path_factory.mktemp("corpus")
    write_fixture_corpus(corpus)
    return corpus
