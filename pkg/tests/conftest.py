import pytest

from evidentia import demo, dictionary, kg, textindex
from evidentia.pipeline import load_dataset
from evidentia.retrieval import Stores


@pytest.fixture(scope="session")
def farmland_paths(tmp_path_factory):
    return demo.write_farmland_fixture(tmp_path_factory.mktemp("farmland"))


@pytest.fixture(scope="session")
def farmland_graph(farmland_paths):
    return kg.ingest_conceptnet(farmland_paths["conceptnet"])


@pytest.fixture(scope="session")
def farmland_text(farmland_paths):
    return textindex.ingest_corpus(farmland_paths["wiki"])


@pytest.fixture(scope="session")
def farmland_dict(farmland_paths):
    return dictionary.ingest_dictionary(farmland_paths["dict"])


@pytest.fixture(scope="session")
def farmland_stores(farmland_graph, farmland_text, farmland_dict):
    return Stores(farmland_graph, farmland_text, farmland_dict)


@pytest.fixture(scope="session")
def farmland_records(farmland_paths):
    return load_dataset(farmland_paths["data"])


@pytest.fixture(scope="session")
def farmland_question(farmland_records):
    return farmland_records[0].to_question()
