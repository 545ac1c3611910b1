# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
Target cost matrices built from ground-truth segmentations, and noisy
stand-ins for the costs a trained predictor would produce.
"""

import logging

import numpy as np

from .config import Configurable
from .errors import DomainError
from .matrix import CostMatrix
from .phonemes import build_similarity_table, normalize_symbol

__all__ = [
    "TargetCostBuilder",
    "build_target_cost",
    "apply_edge_attenuation",
    "normalize_time_axis",
    "synthesize_predicted_cost",
    "cost_from_emissions",
    "default_edge_sigma",
]

logger = logging.getLogger(__name__)

# Gaussian attenuation is cut off this many sigmas from a span edge.
EDGE_CUTOFF = 3.0


def default_edge_sigma(span_len):
    """Attenuation width for a span: 10% of its length but at least one frame."""
    return max(1.0, 0.1 * span_len)


def _label_list(labels):
    if isinstance(labels, str):
        labels = labels.split()
    labels = [normalize_symbol(lbl) for lbl in labels]
    if not labels:
        raise DomainError("The label sequence is empty.")
    return labels


def build_target_cost(
    seg, labels, sim=None, edge_sigma=None, num_frames=None, attenuate=True, normalize=False
):
    """
    Build the target cost of matching each label to each frame.

    The raw cost is 0 where the label equals the frame's ground-truth
    phoneme, 1 - s(label, phoneme) elsewhere, and 1 on frames outside
    every span.

    Args:
        seg: Ground-truth Segmentation.
        labels: Phoneme label sequence (the cost matrix rows).
        sim: SimilarityTable. Defaults to the one for the shipped inventory.
        edge_sigma: Width of the edge attenuation in frames. None picks
            default_edge_sigma() for each span.
        num_frames: Number of frames. Defaults to the end of the last span.
        attenuate: Apply apply_edge_attenuation() to the raw costs.
        normalize: Apply normalize_time_axis() to the result.

    Returns:
        CostMatrix of shape len(labels) x num_frames.
    """
    sim = sim or build_similarity_table()
    labels = _label_list(labels)
    if num_frames is None:
        num_frames = seg.num_frames
    if num_frames < 1:
        raise DomainError("A cost matrix needs at least one frame.")
    seg.validate(num_frames)

    label_idx = sim.indices(labels)
    frame_phonemes = seg.frame_labels(num_frames)

    # Silence frames are maximally costly against every label.
    data = np.ones((len(labels), num_frames))
    for t, phoneme in enumerate(frame_phonemes):
        if phoneme is None:
            continue
        data[:, t] = 1.0 - sim.values[label_idx, sim.index(phoneme)]
    cost = CostMatrix(labels, data)

    if attenuate:
        cost = apply_edge_attenuation(cost, seg, edge_sigma)
    if normalize:
        cost = normalize_time_axis(cost)
    return cost


def apply_edge_attenuation(raw, seg, edge_sigma=None):
    """
    Soften the target cost near the edges of each ground-truth span.

    Inside a span of phoneme p, every row labeled p is pulled toward its row
    mean m by c + g(j)*(m - c), where g(j) = exp(-d^2 / (2 sigma^2)) and d
    is the distance of frame j from the nearer span edge. g is taken as 0
    once d >= 3 sigma. Single-frame spans are left alone.

    Raises:
        DomainError: edge_sigma <= 0.
    """
    if edge_sigma is not None and edge_sigma <= 0:
        raise DomainError("edge_sigma must be > 0, got {edge_sigma}.".format(**locals()))

    row_means = raw.data.mean(axis=1)
    data = raw.data.copy()
    labels = np.array(raw.row_labels, dtype=object)
    for phoneme, onset, offset in seg:
        span_len = offset - onset
        if span_len < 2 or onset >= raw.num_frames:
            continue
        rows = np.flatnonzero(labels == phoneme)
        if rows.size == 0:
            continue
        sigma = edge_sigma if edge_sigma is not None else default_edge_sigma(span_len)
        frames = np.arange(onset, min(offset, raw.num_frames))
        d = np.minimum(frames - onset, offset - 1 - frames)
        g = np.exp(-(d ** 2) / (2.0 * sigma ** 2))
        g[d >= EDGE_CUTOFF * sigma] = 0.0
        block = data[np.ix_(rows, frames)]
        data[np.ix_(rows, frames)] = block + g * (row_means[rows, None] - block)
    return raw.copy(data)


def normalize_time_axis(cost):
    """Replace each row by the softmax over frames of its negated costs."""
    z = -cost.data
    z = z - z.max(axis=1, keepdims=True)
    w = np.exp(z)
    return cost.copy(w / w.sum(axis=1, keepdims=True))


def synthesize_predicted_cost(seg, labels, sim=None, noise_level=0.1, rng_seed=None, **kwargs):
    """
    Target cost plus uniform noise in [0, noise_level]. The same seed gives
    the same matrix.

    The noise only ever raises a cost, so no mismatched cell drops below
    its tol = 1 threshold (1 - s) * tol.

    Keywords Args:
        Passed on to build_target_cost().
    """
    if noise_level < 0:
        raise DomainError("noise_level must be >= 0, got {noise_level}.".format(**locals()))
    target = build_target_cost(seg, labels, sim, **kwargs)
    if noise_level == 0:
        return target.copy()
    rng = np.random.default_rng(rng_seed)
    noise = rng.uniform(0.0, noise_level, size=target.shape)
    return target.copy(target.data + noise)


def cost_from_emissions(emissions, labels):
    """Cost of matching each label to each frame as 1 - P(label | frame)."""
    labels = _label_list(labels)
    vocab = emissions.vocab
    try:
        rows = [vocab.index(lbl) for lbl in labels]
    except ValueError:
        raise DomainError("Labels {labels} aren't all in the emission vocabulary.".format(**locals()))
    return CostMatrix(labels, np.clip(1.0 - emissions.data[rows], 0.0, None))


class TargetCostBuilder(Configurable):
    """Builds target costs with configurable attenuation and normalization."""

    edge_sigma = None
    attenuate = True
    normalize = False

    config_fields = ["edge_sigma", "attenuate", "normalize"]

    def __init__(self, **kwargs):
        if kwargs.get("edge_sigma") is not None and kwargs["edge_sigma"] <= 0:
            raise DomainError("edge_sigma must be > 0.")
        super().__init__(**kwargs)

    def build(self, seg, labels, sim=None, num_frames=None):
        return build_target_cost(
            seg,
            labels,
            sim,
            edge_sigma=self.edge_sigma,
            num_frames=num_frames,
            attenuate=self.attenuate,
            normalize=self.normalize,
        )

    def synthesize(self, seg, labels, sim=None, noise_level=0.1, rng_seed=None, num_frames=None):
        return synthesize_predicted_cost(
            seg,
            labels,
            sim,
            noise_level=noise_level,
            rng_seed=rng_seed,
            edge_sigma=self.edge_sigma,
            num_frames=num_frames,
            attenuate=self.attenuate,
            normalize=self.normalize,
        )
