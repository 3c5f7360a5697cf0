import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def data_dir() -> str:
    return DATA_DIR


@pytest.fixture
def state_dir(tmp_path) -> str:
    return str(tmp_path / "state")
