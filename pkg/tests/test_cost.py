#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_cost
----------------------------------

Tests for target cost construction.
"""

import math

import numpy as np
import pytest

from lcsctc.cost import (
    TargetCostBuilder,
    apply_edge_attenuation,
    build_target_cost,
    cost_from_emissions,
    default_edge_sigma,
    normalize_time_axis,
    synthesize_predicted_cost,
)
from lcsctc.errors import DomainError
from lcsctc.matrix import CostMatrix, EmissionMatrix
from lcsctc.segmentation import Segmentation


def test_exact_match_costs_nothing(sim):
    seg = Segmentation([("IH", 0, 4)])
    cost = build_target_cost(seg, ["IH"], sim, attenuate=False)
    assert np.array_equal(cost.data, np.zeros((1, 4)))


def test_similar_phoneme_cost(sim):
    seg = Segmentation([("Z", 0, 2)])
    cost = build_target_cost(seg, "S", sim, attenuate=False)
    assert np.allclose(cost.data, [[0.125, 0.125]])


def test_raw_cost_rows(sim):
    seg = Segmentation([("IH", 0, 3), ("N", 3, 6)])
    cost = build_target_cost(seg, "IH N", sim, attenuate=False, num_frames=8)
    assert cost.row_labels == ["IH", "N"]
    assert np.array_equal(cost.data[0], [0, 0, 0, 1, 1, 1, 1, 1])
    assert np.array_equal(cost.data[1], [1, 1, 1, 0, 0, 0, 1, 1])


def test_empty_labels(sim):
    with pytest.raises(DomainError):
        build_target_cost(Segmentation([("IH", 0, 2)]), [], sim)


def test_edge_attenuation(sim):
    seg = Segmentation([("IH", 0, 10)])
    raw = build_target_cost(seg, ["IH"], sim, attenuate=False, num_frames=20)
    cost = apply_edge_attenuation(raw, seg, edge_sigma=1.0)
    row = cost.data[0]
    assert row[0] == pytest.approx(0.5)
    assert row[9] == pytest.approx(0.5)
    assert row[1] == pytest.approx(0.5 * math.exp(-0.5))
    assert row[3] == 0.0
    assert row[5] == 0.0
    assert np.array_equal(row[10:], np.ones(10))


def test_single_frame_span_is_not_attenuated(sim):
    seg = Segmentation([("IH", 0, 1)])
    raw = build_target_cost(seg, ["IH"], sim, attenuate=False, num_frames=3)
    assert apply_edge_attenuation(raw, seg) == raw


def test_bad_edge_sigma(sim):
    seg = Segmentation([("IH", 0, 4)])
    with pytest.raises(DomainError):
        build_target_cost(seg, ["IH"], sim, edge_sigma=0)
    with pytest.raises(DomainError):
        TargetCostBuilder(edge_sigma=-1.0)


def test_default_edge_sigma():
    assert default_edge_sigma(4) == 1.0
    assert default_edge_sigma(30) == pytest.approx(3.0)


def test_normalize_time_axis():
    cost = normalize_time_axis(CostMatrix(["IH"], [[0.0, 1.0]]))
    expected = np.array([1.0, math.exp(-1.0)]) / (1.0 + math.exp(-1.0))
    assert np.allclose(cost.data[0], expected)
    assert cost.data[0].sum() == pytest.approx(1.0)


def test_synthesized_cost(sim):
    seg = Segmentation([("IH", 1, 5), ("N", 5, 9)])
    target = build_target_cost(seg, "IH N", sim, num_frames=10)
    assert synthesize_predicted_cost(seg, "IH N", sim, noise_level=0, num_frames=10) == target

    a = synthesize_predicted_cost(seg, "IH N", sim, noise_level=0.1, rng_seed=3, num_frames=10)
    b = synthesize_predicted_cost(seg, "IH N", sim, noise_level=0.1, rng_seed=3, num_frames=10)
    assert a == b
    assert a != target
    # Noise only raises costs.
    assert np.all(a.data >= target.data)
    assert np.all(a.data - target.data <= 0.1 + 1e-12)

    with pytest.raises(DomainError):
        synthesize_predicted_cost(seg, "IH N", sim, noise_level=-0.1)


def test_builder_settings(sim):
    builder = TargetCostBuilder(attenuate=False)
    assert builder.settings() == {"edge_sigma": None, "attenuate": False, "normalize": False}
    seg = Segmentation([("IH", 0, 3)])
    assert builder.build(seg, "IH", sim) == build_target_cost(seg, "IH", sim, attenuate=False)
    with pytest.raises(TypeError):
        TargetCostBuilder(bogus=1)


def test_cost_from_emissions():
    em = EmissionMatrix(["<blank>", "IH", "N"], [[0.2, 0.5], [0.7, 0.1], [0.1, 0.4]])
    cost = cost_from_emissions(em, "N IH")
    assert np.allclose(cost.data, [[0.9, 0.6], [0.3, 0.9]])
