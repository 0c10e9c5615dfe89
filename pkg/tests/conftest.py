from pathlib import Path

import pytest

from stutterpoisson import CountHistogram

REPO_ROOT = Path(__file__).resolve().parent.parent

#: Auto-insurance claim counts: observed policies per number of claims.
CLAIMS_BINS = {0: 96978, 1: 9240, 2: 704, 3: 43, 4: 9}


@pytest.fixture(scope="session")
def claims_csv() -> Path:
    return REPO_ROOT / "data" / "table1.csv"


@pytest.fixture(scope="session")
def claims_hist() -> CountHistogram:
    return CountHistogram(dict(CLAIMS_BINS))
