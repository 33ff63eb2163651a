import numpy as np
import pytest

from markov_id import EdgeSet, validate


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


@pytest.fixture
def two_state():
    """Reversible 2-state chain with stationary law (1/3, 2/3)."""
    return validate(2, EdgeSet.complete(2), [[0.5, 0.5], [0.25, 0.75]])


@pytest.fixture
def ref_three_state():
    """Reversible 3-state chain with stationary law (1/4, 1/4, 1/2)."""
    return validate(
        3,
        EdgeSet.complete(3),
        [[0.88, 0.04, 0.08], [0.04, 0.88, 0.08], [0.04, 0.04, 0.92]],
    )


@pytest.fixture
def alt_three_state():
    """Second reversible chain with stationary law (1/4, 1/4, 1/2), far from the reference."""
    return validate(
        3,
        EdgeSet.complete(3),
        [[0.04, 0.04, 0.92], [0.04, 0.04, 0.92], [0.46, 0.46, 0.08]],
    )
