import os
import tempfile

import numpy as np
import pytest

# the run registry and result files go to a throwaway directory
_TMP = tempfile.mkdtemp(prefix="nullcast-tests-")
os.environ["NULLCAST_DATABASE_URL"] = f"sqlite:///{os.path.join(_TMP, 'nullcast.db')}"
os.environ["NULLCAST_BROKER_URL"] = "memory://"
os.environ["NULLCAST_RESULT_BACKEND"] = "cache+memory://"
os.environ["NULLCAST_OUTPUT_DIR"] = os.path.join(_TMP, "results")
os.environ["NULLCAST_THREADS"] = "2"


@pytest.fixture
def rng():
    """Fixed RNG for reproducible tests."""
    return np.random.default_rng(42)


@pytest.fixture
def tmp_output(tmp_path):
    return tmp_path / "out.csv"
