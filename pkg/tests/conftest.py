import numpy as np
import pytest

from floodrisk import data
from floodrisk.config import bundled_path


@pytest.fixture(scope="session")
def loss_records():
    recs = data.load_loss_csv(bundled_path("losses.csv"))
    cpi = data.load_cpi_csv(bundled_path("cpi.csv"))
    return data.normalize_cpi(recs, cpi, 2019)


@pytest.fixture(scope="session")
def losses(loss_records):
    return data.losses(loss_records)


@pytest.fixture(scope="session")
def threshold(losses):
    return float(data.empirical_quantile(losses, 0.7))


@pytest.fixture(scope="session")
def indicators():
    return data.load_indicator_csv(bundled_path("indicators.csv"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
