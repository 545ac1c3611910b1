# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
Partial phoneme-to-frame alignment: pick the confident (phoneme, frame)
matches from a cost matrix and keep the largest monotone subset of them.
"""

import functools
import logging

import numpy as np
import pandas as pd

from .config import Configurable
from .errors import DomainError
from .matrix import AlignmentMask
from .phonemes import build_similarity_table

__all__ = [
    "ValidMatchSet",
    "Aligner",
    "find_valid_matches",
    "lcs_align",
    "brute_force_align",
    "expand_mask",
    "constrained_ratio",
    "alignment_precision",
    "tol_sweep",
]

logger = logging.getLogger(__name__)

# Size limits for the exhaustive alignment search.
BRUTE_FORCE_MAX_PHONEMES = 6
BRUTE_FORCE_MAX_FRAMES = 8


class ValidMatchSet(frozenset):
    """
    Set of (phoneme index, frame index) pairs that passed the
    similarity-adjusted threshold, plus the grid they live on and,
    optionally, the costs they were selected from.
    """

    def __new__(cls, pairs, labels, num_frames, costs=None):
        pairs = frozenset((int(i), int(j)) for i, j in pairs)
        for i, j in pairs:
            if not (0 <= i < len(labels) and 0 <= j < num_frames):
                raise DomainError(
                    "Match ({i}, {j}) lies outside the {n} x {num_frames} grid.".format(
                        n=len(labels), **locals()
                    )
                )
        obj = super().__new__(cls, pairs)
        obj.labels = list(labels)
        obj.num_frames = num_frames
        obj.costs = None if costs is None else np.asarray(costs, dtype=float)
        return obj

    def __init__(self, *args, **kwargs):
        pass

    @property
    def n(self):
        return len(self.labels)

    def to_array(self):
        """Return an n x T boolean array with the valid cells set."""
        arr = np.zeros((self.n, self.num_frames), dtype=bool)
        for i, j in self:
            arr[i, j] = True
        return arr


def find_valid_matches(cost, labels=None, sim=None, tol=1.0, cost_floor=0.05):
    """
    Find the (phoneme, frame) cells whose cost is below a similarity-adjusted
    threshold.

    For each frame j, k is the row with the lowest cost (first one on ties).
    Cell (i, j) is valid if C[i,j] <= (1 - s(p_i, p_k)) * tol, except when
    p_i and p_k are the same phoneme where it must be C[i,j] <= cost_floor.

    Args:
        cost: CostMatrix, n x T.
        labels: Phoneme for each row. Defaults to the row labels of the cost.
        sim: SimilarityTable. Defaults to the one for the shipped inventory.
        tol: Threshold scale, > 0.
        cost_floor: Threshold for cells matching the best phoneme of their frame.

    Returns:
        ValidMatchSet.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0, got {tol}.".format(**locals()))
    if cost_floor < 0:
        raise DomainError("cost_floor must be >= 0, got {cost_floor}.".format(**locals()))
    labels = list(cost.row_labels if labels is None else labels)
    if len(labels) != cost.num_rows:
        raise DomainError(
            "{n} labels given for a cost matrix with {r} rows.".format(n=len(labels), r=cost.num_rows)
        )
    sim = sim or build_similarity_table()

    idx = sim.indices(labels)
    pair_sim = sim.values[np.ix_(idx, idx)]
    same = np.equal.outer(idx, idx)

    c = cost.data
    best = np.argmin(c, axis=0)  # First minimum wins ties.
    threshold = (1.0 - pair_sim[:, best]) * tol
    threshold = np.where(same[:, best], cost_floor, threshold)
    rows, cols = np.nonzero(c <= threshold)

    valid = ValidMatchSet(zip(rows.tolist(), cols.tolist()), labels, cost.num_frames, c)
    logger.debug("%d valid matches in a %d x %d cost matrix", len(valid), cost.num_rows, cost.num_frames)
    return valid


def _as_grid(valid, n, num_frames, labels, cost):
    costs = None
    if isinstance(valid, ValidMatchSet):
        n = valid.n if n is None else n
        num_frames = valid.num_frames if num_frames is None else num_frames
        labels = valid.labels if labels is None else labels
        costs = valid.costs
    if n is None or num_frames is None:
        raise DomainError("The grid size is needed for a plain set of matches.")
    if labels is None:
        labels = [str(i) for i in range(n)]
    grid = np.zeros((n, num_frames), dtype=bool)
    for i, j in valid:
        if not (0 <= i < n and 0 <= j < num_frames):
            raise DomainError("Match ({i}, {j}) lies outside the grid.".format(**locals()))
        grid[i, j] = True
    if cost is not None:
        costs = getattr(cost, "data", cost)
    if costs is None:
        costs = np.zeros((n, num_frames))
    costs = np.asarray(costs, dtype=float)
    if costs.shape != (n, num_frames):
        raise DomainError(
            "Costs of shape {s} don't fit the {n} x {num_frames} grid.".format(s=costs.shape, **locals())
        )
    return grid, list(labels), costs


# Traceback moves, in order of preference on exact ties.
TAKE, UP, SKIP = 0, 1, 2

# Total costs closer than this count as equal.
COST_TIE = 1e-9


def lcs_align(valid, n=None, num_frames=None, labels=None, cost=None):
    """
    Keep the largest monotone subset of the valid matches.

    Frames are given to phonemes so that every assigned pair is valid, frame
    indices increase strictly while phoneme indices never decrease, and the
    number of assigned frames is as large as possible. A phoneme can take
    any later valid frames in its row, contiguous or not.

    Among equally large subsets the one with the lowest total cost wins.
    Remaining ties prefer taking the current cell, then moving to the
    previous phoneme, then skipping the frame, walking back from the last
    phoneme and frame.

    Args:
        valid: ValidMatchSet or a set of (phoneme index, frame index) pairs.
        n: Number of phonemes (taken from a ValidMatchSet if omitted).
        num_frames: Number of frames (taken from a ValidMatchSet if omitted).
        labels: Row labels of the resulting mask.
        cost: CostMatrix or n x num_frames array breaking ties between
            equally large subsets. Defaults to the costs a ValidMatchSet was
            selected from, or no tie-break for a plain set.

    Returns:
        AlignmentMask of shape n x num_frames.
    """
    grid, labels, costs = _as_grid(valid, n, num_frames, labels, cost)
    n, num_frames = grid.shape

    # count[i][j], total[i][j]: most frames alignable using phonemes < i and
    # frames < j, and the lowest cost of doing so.
    count = np.zeros((n + 1, num_frames + 1), dtype=int)
    total = np.zeros((n + 1, num_frames + 1))
    move = np.full((n + 1, num_frames + 1), SKIP, dtype=int)
    for i in range(1, n + 1):
        for j in range(1, num_frames + 1):
            options = []
            if grid[i - 1, j - 1]:
                options.append((TAKE, count[i, j - 1] + 1, total[i, j - 1] + costs[i - 1, j - 1]))
            options.append((UP, count[i - 1, j], total[i - 1, j]))
            options.append((SKIP, count[i, j - 1], total[i, j - 1]))
            best = options[0]
            for option in options[1:]:
                if option[1] > best[1] or (option[1] == best[1] and option[2] < best[2] - COST_TIE):
                    best = option
            move[i, j], count[i, j], total[i, j] = best

    bits = np.zeros((n, num_frames), dtype=int)
    i, j = n, num_frames
    while i > 0 and j > 0:
        if move[i, j] == TAKE:
            bits[i - 1, j - 1] = 1
            j -= 1
        elif move[i, j] == UP:
            i -= 1
        else:
            j -= 1

    return AlignmentMask(labels, bits)


def brute_force_align(valid, n, num_frames):
    """
    Exhaustively search all monotone assignments of frames to phonemes.

    Only usable on tiny grids (n <= 6, num_frames <= 8).

    Returns:
        The maximum number of assigned frames and one assignment achieving it
        as a list of (phoneme, frame) pairs.
    """
    if n > BRUTE_FORCE_MAX_PHONEMES or num_frames > BRUTE_FORCE_MAX_FRAMES:
        raise DomainError(
            "Exhaustive alignment is limited to {p} phonemes and {f} frames.".format(
                p=BRUTE_FORCE_MAX_PHONEMES, f=BRUTE_FORCE_MAX_FRAMES
            )
        )
    valid = frozenset(valid)

    @functools.lru_cache(maxsize=None)
    def best(j, lowest):
        """Best assignment of frames >= j to phonemes >= lowest."""
        if j == num_frames:
            return 0, ()
        result = best(j + 1, lowest)
        for i in range(lowest, n):
            if (i, j) in valid:
                count, pairs = best(j + 1, i)
                if count + 1 > result[0]:
                    result = (count + 1, ((i, j),) + pairs)
        return result

    count, pairs = best(0, 0)
    return count, list(pairs)


def expand_mask(mask, vocab):
    """
    Re-index a phoneme-sequence mask onto the vocabulary.

    Args:
        mask: AlignmentMask over the label sequence.
        vocab: Vocabulary symbols ordered by id (blank first) or an Inventory.

    Returns:
        AlignmentMask of shape V x T. The blank row is always zero.
    """
    vocab = list(getattr(vocab, "vocab", vocab))
    try:
        rows = [vocab.index(lbl) for lbl in mask.row_labels]
    except ValueError:
        raise DomainError(
            "Mask labels {labels} aren't all in the vocabulary.".format(labels=mask.row_labels)
        )
    data = np.zeros((len(vocab), mask.num_frames), dtype=int)
    for i, j in zip(*np.nonzero(mask.data)):
        data[rows[i], j] = 1
    return AlignmentMask(vocab, data)


class Aligner(Configurable):
    """Finds valid matches and aligns them with configurable thresholds."""

    tol = 1.0
    cost_floor = 0.05

    config_fields = ["tol", "cost_floor"]

    def __init__(self, sim=None, **kwargs):
        super().__init__(**kwargs)
        if self.tol <= 0:
            raise DomainError("tol must be > 0, got {tol}.".format(tol=self.tol))
        if self.cost_floor < 0:
            raise DomainError("cost_floor must be >= 0, got {f}.".format(f=self.cost_floor))
        self.sim = sim

    def valid_matches(self, cost, labels=None):
        return find_valid_matches(cost, labels, self.sim, self.tol, self.cost_floor)

    def align(self, cost, labels=None):
        """Return the AlignmentMask for a cost matrix."""
        return lcs_align(self.valid_matches(cost, labels))


def align(cost, labels=None, sim=None, tol=1.0, cost_floor=0.05):
    """find_valid_matches() followed by lcs_align()."""
    return lcs_align(find_valid_matches(cost, labels, sim, tol, cost_floor))


def constrained_ratio(mask):
    """Fraction of frames with an anchored phoneme."""
    return float(np.mean(mask.data.any(axis=0)))


def _precision_counts(mask, seg):
    frame_phonemes = seg.frame_labels(mask.num_frames)
    rows, cols = np.nonzero(mask.data)
    hits = sum(mask.row_labels[i] == frame_phonemes[j] for i, j in zip(rows, cols))
    return int(hits), len(rows)


def alignment_precision(mask, seg):
    """
    Fraction of anchored cells whose phoneme is the ground-truth phoneme of
    their frame. NaN when nothing is anchored.
    """
    hits, total = _precision_counts(mask, seg)
    return hits / total if total else float("nan")


def tol_sweep(utterances, tols, sim=None, cost_floor=0.05):
    """
    Measure the constrained-frame ratio and anchoring precision over a range
    of tolerances.

    Args:
        utterances: Iterable of (CostMatrix, Segmentation) pairs. The cost
            rows are the label sequence.
        tols: Tolerances to try.
        sim: SimilarityTable.
        cost_floor: Threshold for self-matches.

    Returns:
        Pandas DataFrame with columns tol, constrained_ratio and precision,
        both micro-averaged over all utterances.
    """
    utterances = list(utterances)
    sim = sim or build_similarity_table()
    rows = []
    for tol in tols:
        anchored = frames = hits = total = 0
        for cost, seg in utterances:
            mask = align(cost, sim=sim, tol=tol, cost_floor=cost_floor)
            anchored += int(mask.data.any(axis=0).sum())
            frames += mask.num_frames
            h, t = _precision_counts(mask, seg)
            hits += h
            total += t
        ratio = anchored / frames if frames else float("nan")
        precision = hits / total if total else float("nan")
        logger.debug("tol=%g: constrained ratio %.4f, precision %.4f", tol, ratio, precision)
        rows.append((float(tol), ratio, precision))
    return pd.DataFrame(rows, columns=["tol", "constrained_ratio", "precision"])
