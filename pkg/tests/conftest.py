import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rulemine import TransactionMatrix

GROCERY_LABELS = ("milk", "bread", "butter", "eggs", "beer", "diapers", "fruit")
GROCERY_BASKETS = (
    ("milk", "bread", "fruit"),
    ("butter", "eggs", "fruit"),
    ("beer", "diapers"),
    ("milk", "bread", "butter", "eggs", "fruit"),
    ("bread",),
)


@pytest.fixture(scope="session")
def grocery_data() -> TransactionMatrix:
    """Five-basket table whose metric values are exact in doubles."""
    rows = np.zeros((5, 7), dtype=np.uint8)
    for j, names in enumerate(GROCERY_BASKETS):
        for name in names:
            rows[j, GROCERY_LABELS.index(name)] = 1
    return TransactionMatrix(rows, GROCERY_LABELS)


def random_matrix(rng, max_n=60, max_m=8, min_m=1) -> np.ndarray:
    N = int(rng.integers(1, max_n + 1))
    M = int(rng.integers(min_m, max_m + 1))
    density = float(rng.uniform(0.1, 0.9))
    return (rng.random((N, M)) < density).astype(np.uint8)


@pytest.fixture(scope="session")
def reward_pin_data() -> TransactionMatrix:
    """28x2 table with conf(0 -> 1) = 0.9 and lift = 1.4 exactly."""
    rows = np.zeros((28, 2), dtype=np.uint8)
    rows[:9] = (1, 1)
    rows[9] = (1, 0)
    rows[10:19] = (0, 1)
    return TransactionMatrix(rows)
