import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def phosphate_path() -> pathlib.Path:
    return ROOT / "data" / "phosphate.csv"


@pytest.fixture(scope="session")
def phosphate_text(phosphate_path) -> str:
    return phosphate_path.read_text()
