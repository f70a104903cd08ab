import warnings

import pytest

warnings.filterwarnings("ignore", category=FutureWarning)
warnings.filterwarnings("ignore", category=UserWarning)

EXPORT_SEED = 11


@pytest.fixture(scope="session")
def exported_dir(tmp_path_factory):
    """One real (random-weight) export shared by the whole session."""
    from encoder_export.export import export_encoders

    out = tmp_path_factory.mktemp("exported")
    manifest = export_encoders(out, seed=EXPORT_SEED)
    return out, manifest


@pytest.fixture(scope="session")
def stub_dir(tmp_path_factory):
    from encoder_export.stub import make_stub_fixtures

    out = tmp_path_factory.mktemp("stub")
    hashes = make_stub_fixtures(out, seed=5)
    return out, hashes
