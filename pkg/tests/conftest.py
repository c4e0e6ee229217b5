import pytest

from ergotest import bootstrap


@pytest.fixture(scope="session", autouse=True)
def setup_ergotest_catalog() -> None:
    """Bootstrap the system and phi catalogs once for the entire test session."""

    bootstrap()
