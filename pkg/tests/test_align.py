#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_align
----------------------------------

Tests for valid-match selection and partial LCS alignment.
"""

import numpy as np
import pytest

from lcsctc.align import (
    Aligner,
    ValidMatchSet,
    alignment_precision,
    brute_force_align,
    constrained_ratio,
    expand_mask,
    find_valid_matches,
    lcs_align,
    tol_sweep,
)
from lcsctc.cost import build_target_cost, synthesize_predicted_cost
from lcsctc.errors import DomainError
from lcsctc.matrix import AlignmentMask, CostMatrix
from lcsctc.phonemes import ARPABET, BLANK
from lcsctc.segmentation import Segmentation
from lcsctc.toy import gen_synthetic


def test_own_span_cells_are_valid(sim):
    seg = Segmentation([("IH", 0, 3), ("N", 3, 6), ("S", 6, 9)])
    cost = build_target_cost(seg, "IH N S", sim, attenuate=False)
    valid = find_valid_matches(cost, sim=sim, tol=1.0)
    for i, (_, onset, offset) in enumerate(seg):
        for j in range(onset, offset):
            assert (i, j) in valid


def test_self_match_uses_cost_floor(sim):
    cost = CostMatrix(["IH"], [[0.9]])
    assert len(find_valid_matches(cost, sim=sim)) == 0
    assert len(find_valid_matches(cost, sim=sim, cost_floor=0.95)) == 1


def test_bad_tolerance(sim):
    cost = CostMatrix(["IH"], [[0.0]])
    with pytest.raises(DomainError):
        find_valid_matches(cost, sim=sim, tol=0)
    with pytest.raises(DomainError):
        Aligner(tol=-1.0)
    with pytest.raises(DomainError):
        find_valid_matches(cost, sim=sim, cost_floor=-0.1)
    with pytest.raises(DomainError):
        Aligner(cost_floor=-0.1)


def test_zero_floor_and_tiny_tol_match_nothing(sim):
    seg = Segmentation([("IH", 1, 4), ("N", 4, 7)])
    cost = synthesize_predicted_cost(seg, "IH N", sim, noise_level=0.1, rng_seed=3, num_frames=8)
    mask = Aligner(sim, tol=1e-3, cost_floor=0.0).align(cost)
    assert mask.cells() == set()
    assert constrained_ratio(mask) == 0.0


def test_lcs_example():
    mask = lcs_align({(0, 0), (0, 1), (1, 2)}, n=2, num_frames=3)
    assert mask.cells() == {(0, 0), (0, 1), (1, 2)}
    assert mask.row_labels == ["0", "1"]


def test_lcs_empty():
    mask = lcs_align(set(), n=2, num_frames=3)
    assert not mask.data.any()


def test_lcs_anti_monotone_tie():
    mask = lcs_align({(1, 0), (0, 1)}, n=2, num_frames=2)
    assert mask.cells() == {(0, 1)}


def test_lcs_needs_grid_size():
    with pytest.raises(DomainError):
        lcs_align({(0, 0)})
    with pytest.raises(DomainError):
        ValidMatchSet([(2, 0)], ["IH"], 3)


def check_monotone(cells):
    cells = sorted(cells, key=lambda c: c[1])
    frames = [j for _, j in cells]
    assert len(set(frames)) == len(frames)
    phonemes = [i for i, _ in cells]
    assert phonemes == sorted(phonemes)


def test_lcs_matches_exhaustive_search():
    rng = np.random.default_rng(1234)
    for _ in range(10000):
        n = int(rng.integers(1, 7))
        num_frames = int(rng.integers(1, 9))
        grid = rng.random((n, num_frames)) < rng.uniform(0.1, 0.7)
        valid = set(zip(*(idx.tolist() for idx in np.nonzero(grid))))
        mask = lcs_align(valid, n=n, num_frames=num_frames)
        cells = mask.cells()
        best, pairs = brute_force_align(valid, n, num_frames)
        assert len(cells) == best
        assert cells <= valid
        check_monotone(cells)
        check_monotone(pairs)


def test_brute_force_size_limit():
    with pytest.raises(DomainError):
        brute_force_align(set(), 7, 3)


def test_larger_tolerance_never_shrinks_alignment(sim):
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 6))
        num_frames = int(rng.integers(1, 12))
        labels = [ARPABET[k] for k in rng.integers(len(ARPABET), size=n)]
        cost = CostMatrix(labels, rng.random((n, num_frames)))
        tols = sorted(rng.uniform(0.5, 2.0, size=2))
        small = find_valid_matches(cost, sim=sim, tol=tols[0])
        large = find_valid_matches(cost, sim=sim, tol=tols[1])
        assert small <= large
        assert lcs_align(small).data.sum() <= lcs_align(large).data.sum()


def test_aligner(sim):
    seg = Segmentation([("IH", 1, 4), ("N", 4, 7)])
    cost = build_target_cost(seg, "IH N", sim, num_frames=8, attenuate=False)
    aligner = Aligner(sim, tol=0.9)
    mask = aligner.align(cost)
    assert isinstance(mask, AlignmentMask)
    assert mask.row_labels == ["IH", "N"]
    assert mask.cells() == {(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (1, 6)}
    assert alignment_precision(mask, seg) == 1.0
    assert constrained_ratio(mask) == 6 / 8
    assert aligner.settings() == {"tol": 0.9, "cost_floor": 0.05}


def test_precision_without_anchors():
    mask = AlignmentMask(["IH"], [[0, 0]])
    assert np.isnan(alignment_precision(mask, Segmentation([("IH", 0, 2)])))
    assert constrained_ratio(mask) == 0.0


def test_expand_mask(inventory):
    mask = AlignmentMask(["IH"], [[1, 0, 0]])
    full = expand_mask(mask, inventory)
    assert full.shape == (40, 3)
    assert full.cells() == {(inventory.id("IH"), 0)}
    assert full.row_labels[0] == BLANK

    repeated = expand_mask(AlignmentMask(["IH", "N", "IH"], [[1, 0, 0], [0, 1, 0], [0, 0, 1]]), inventory)
    ih = inventory.id("IH")
    assert repeated.cells() == {(ih, 0), (inventory.id("N"), 1), (ih, 2)}

    with pytest.raises(DomainError):
        expand_mask(AlignmentMask(["XX"], [[1]]), inventory)


def test_lcs_prefers_cheapest_subset():
    grid = {(0, 0), (0, 1), (1, 0), (1, 1)}
    assert lcs_align(grid, n=2, num_frames=2).cells() == {(1, 0), (1, 1)}
    costs = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert lcs_align(grid, n=2, num_frames=2, cost=costs).cells() == {(0, 0), (1, 1)}
    cost = CostMatrix(["IH", "N"], costs)
    valid = ValidMatchSet(grid, ["IH", "N"], 2, cost.data)
    assert lcs_align(valid).cells() == {(0, 0), (1, 1)}
    with pytest.raises(DomainError):
        lcs_align(grid, n=2, num_frames=2, cost=np.zeros((2, 3)))


def test_count_beats_cost():
    # Two cheap cells can't outweigh three dear ones.
    grid = {(0, 0), (1, 1), (0, 1), (0, 2)}
    costs = np.array([[5.0, 5.0, 5.0], [9.0, 0.0, 9.0]])
    assert lcs_align(grid, n=2, num_frames=3, cost=costs).cells() == {(0, 0), (0, 1), (0, 2)}


def test_tol_sweep_trends(sim):
    tols = [0.9, 1.0, 1.1, 1.2, 1.3]
    for seed in range(5):
        dataset = gen_synthetic(num_utts=40, rng_seed=seed, cost_noise=0.1, sim=sim)
        utterances = [(u.cost, u.segmentation) for u in dataset]
        df = tol_sweep(utterances, tols, sim)
        assert list(df.columns) == ["tol", "constrained_ratio", "precision"]
        assert list(df["tol"]) == tols
        ratios = df["constrained_ratio"].tolist()
        assert all(a <= b for a, b in zip(ratios, ratios[1:]))
        precision = df["precision"].tolist()
        assert all(b <= a for a, b in zip(precision, precision[1:]))
        # Up to tol = 1 only same-phoneme cells pass.
        assert precision[0] == precision[1] == 1.0
        assert ratios[0] == ratios[1]
        assert precision[2] < 1.0
        assert precision[-1] < precision[1]
