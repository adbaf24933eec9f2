import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from skinlink.models import RunConfig  # noqa: E402
from skinlink.services import LinkEvaluationService, SkinAttenuationTable, load_default_table  # noqa: E402


@pytest.fixture(scope="session")
def default_table() -> SkinAttenuationTable:
    return load_default_table()


@pytest.fixture
def flat_table() -> SkinAttenuationTable:
    """Wavelength-independent attenuation of 0.2 1/mm over 400-1600 nm."""
    return SkinAttenuationTable.from_samples([(400e-9, 200.0), (1600e-9, 200.0)], metadata="flat")


@pytest.fixture
def service(default_table) -> LinkEvaluationService:
    return LinkEvaluationService(table=default_table)


@pytest.fixture
def baseline() -> RunConfig:
    return RunConfig()
