"""Pytest fixtures."""

from collections.abc import Iterator
from pathlib import Path

import pytest

from rhlab.config import get_settings
from rhlab.geometry.fields import RHInstance
from rhlab.services import catalog

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(autouse=True)
def _clear_settings_cache(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> Iterator[None]:
    """Reset cached settings and point reports at a temporary directory.

    Parameters
    ----------
    tmp_path : Path
        Temporary path fixture.
    monkeypatch : pytest.MonkeyPatch
        Environment monkeypatch helper.

    Yields
    ------
    None
        Applies environment overrides for each test.
    """
    get_settings.cache_clear()
    monkeypatch.setenv("RHLAB_REPORT_DIR", str(tmp_path))
    monkeypatch.setenv("RHLAB_THREADS", "2")
    yield
    get_settings.cache_clear()


@pytest.fixture()
def sphere() -> RHInstance:
    """Return the round sphere with the height function."""
    return catalog.get_entry("sphere2_linear_form").build()

