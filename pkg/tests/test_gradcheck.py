#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_gradcheck
----------------------------------

Analytic gradients of every objective against central differences.
"""

import numpy as np
import pytest

from lcsctc.errors import DomainError
from lcsctc.gradcheck import (
    OBJECTIVES,
    check_case,
    check_gradients,
    numeric_gradient,
    random_case,
    relative_error,
)


def test_numeric_gradient_of_quadratic():
    grad = numeric_gradient(lambda x: (float((x ** 2).sum()), None), np.array([[1.0, -2.0]]))
    assert np.allclose(grad, [[2.0, -4.0]], atol=1e-8)


def test_relative_error():
    assert relative_error(np.zeros((2, 2)), np.zeros((2, 2))) == 0.0
    assert relative_error(np.array([1.0, 2.0]), np.array([1.0, 2.2])) == pytest.approx(0.2 / 2.2)


@pytest.mark.parametrize("objective", OBJECTIVES)
def test_random_case(objective):
    rng = np.random.default_rng(11)
    case = random_case(rng, objective)
    assert case.objective == objective
    assert case.logits.shape == case.mask.shape
    assert 3 <= len(case.vocab) <= 5
    with pytest.raises(DomainError):
        random_case(rng, "hinge")


def test_all_objectives():
    df = check_gradients(num_cases=120, seed=0)
    assert len(df) == 120
    assert set(df["objective"]) == set(OBJECTIVES)
    assert df["rel_error"].max() < 1e-5


def test_large_epsilon_cases():
    rng = np.random.default_rng(21)
    for _ in range(20):
        case = random_case(rng, "lcs_ctc")._replace(epsilon=1e-3)
        assert check_case(case) < 1e-5
