import json

import pytest

from lab.services.coloring import search_coloring


@pytest.fixture(scope="session")
def avoiding_coloring():
    """A 2-coloring of D(3,9) without monochromatic 3-vertex paths."""
    outcome = search_coloring(3, 9, 2, 3)
    assert outcome.found, outcome.status
    return outcome.coloring


@pytest.fixture
def write_json(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data))
        return str(path)
    return write
