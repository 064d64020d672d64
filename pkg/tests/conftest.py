import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cimgame import InfluenceValues, RRIndex


@pytest.fixture
def fixture_index() -> RRIndex:
    """The four-set coverage fixture {{a},{a,b},{b},{c}} on 10 nodes (a,b,c = 0,1,2)."""
    return RRIndex.from_sets(
        [(0, [0]), (0, [0, 1]), (1, [1]), (2, [2])], n_nodes=10
    )


@pytest.fixture
def worked_values() -> InfluenceValues:
    """The four-node value table {4, 3, 2, 1} used throughout the unit tests."""
    return InfluenceValues(nodes=[0, 1, 2, 3], values=[4.0, 3.0, 2.0, 1.0])


def rng_for(test_seed: int) -> np.random.Generator:
    return np.random.default_rng(test_seed)
