import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# make tests/helpers.py importable regardless of rootdir configuration
sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def stub_assets_dir() -> Path:
    return FIXTURES / "stub_assets"


@pytest.fixture(scope="session")
def images_dir() -> Path:
    return FIXTURES / "images"


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return FIXTURES / "golden"


@pytest.fixture(scope="session")
def bundle(stub_assets_dir):
    from ddr.encoders.session import load_assets

    return load_assets(stub_assets_dir)
