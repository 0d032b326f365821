import numpy as np
import pytest

from lidc import SparseVector, TrainConfig, train_binary


@pytest.fixture(scope="session", autouse=True)
def warm_solver():
    """Trigger JIT compilation of the solver kernel once, up front.

    Keeps wall-time assertions in individual tests about the algorithm,
    not about compiler latency.
    """
    x = [SparseVector(np.array([0], dtype=np.int64), np.array([1.0]))]
    train_binary(x, [1], TrainConfig(fit_bias=False), n_features=1)
