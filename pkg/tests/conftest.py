"""Shared fixtures: a per-session threshold cache and common configs."""

import numpy as np
import pytest

from breakdist.changepoint import DetectorConfig, clear_table_memo


@pytest.fixture(scope="session")
def table_cache(tmp_path_factory):
    """One cache directory for all threshold tables built during the run."""
    return str(tmp_path_factory.mktemp("threshold-cache"))


@pytest.fixture(scope="session")
def mw_cfg(table_cache):
    """Mann-Whitney config shared by detection tests (alpha form)."""
    return DetectorConfig(statistic="mw", alpha=0.05, min_segment=20,
                          mc_replicates=20000, rng_seed=0,
                          cache_dir=table_cache)


@pytest.fixture(scope="session")
def mw_arl_cfg(table_cache):
    """Mann-Whitney config in arl0 form, for sequential monitoring tests."""
    return DetectorConfig(statistic="mw", arl0=10_000.0, min_segment=20,
                          mc_replicates=20000, rng_seed=0,
                          cache_dir=table_cache)


@pytest.fixture(autouse=True)
def _fresh_memo():
    """Keep the in-process table memo from leaking state between tests."""
    yield
    clear_table_memo()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: release gate criteria")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
