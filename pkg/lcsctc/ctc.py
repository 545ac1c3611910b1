# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
CTC loss with analytic gradients, alignment-masked emissions, the combined
anchored-CE + masked-CTC objective, and CTC decoding.

All gradients are with respect to the log-probabilities of the emission
matrix, taken as logits of a per-frame softmax. That makes them directly
usable as the gradient of the model's output logits.
"""

import functools
import itertools
import logging
from collections import namedtuple

import numpy as np

from .config import Configurable
from .errors import DomainError, InfeasibleTargetError
from .matrix import AlignmentMask, EmissionMatrix
from .segmentation import Segmentation, Span

__all__ = [
    "PROB_FLOOR",
    "LossBreakdown",
    "LcsCtcObjective",
    "min_frames",
    "ctc_loss",
    "mask_emissions",
    "ce_anchored",
    "lcs_ctc_loss",
    "viterbi_path",
    "viterbi_align",
    "greedy_decode",
    "segmentation_mask",
    "brute_force_ctc",
]

logger = logging.getLogger(__name__)

# Emission probabilities are clamped to this before taking logs.
PROB_FLOOR = 1e-12

# Largest number of paths the exhaustive oracle will enumerate.
BRUTE_FORCE_MAX_PATHS = 2 ** 20


class LossBreakdown(
    namedtuple("LossBreakdown", "ctc_loss ce_loss total lam num_anchored_frames")
):
    """Components of the combined objective. lam is the weight of the CE term."""

    def to_dict(self):
        return {
            "ctc_loss": self.ctc_loss,
            "ce_loss": self.ce_loss,
            "total": self.total,
            "lambda": self.lam,
            "num_anchored_frames": self.num_anchored_frames,
        }


def _target_ids(emissions, target):
    if isinstance(target, str):
        target = target.split()
    target = list(target)
    if not target:
        raise DomainError("The CTC target is empty.")
    vocab = emissions.vocab
    ids = []
    for sym in target:
        if isinstance(sym, (int, np.integer)):
            if not 0 <= sym < len(vocab):
                raise DomainError(
                    "Target id {sym} is outside the vocabulary of {n} symbols.".format(sym=sym, n=len(vocab))
                )
            ids.append(int(sym))
            continue
        try:
            ids.append(vocab.index(sym))
        except ValueError:
            raise DomainError("Target label '{sym}' isn't in the vocabulary.".format(**locals()))
    if emissions.blank in ids:
        raise DomainError("The CTC target can't contain the blank.")
    return np.array(ids, dtype=int)


def min_frames(target):
    """Fewest frames that can emit a target: one per label plus a blank between repeats."""
    target = list(target)
    repeats = sum(a == b for a, b in zip(target[:-1], target[1:]))
    return len(target) + repeats


def _check_feasible(ids, num_frames):
    needed = min_frames(ids.tolist())
    if num_frames < needed:
        raise InfeasibleTargetError(
            "A target of {n} labels needs at least {needed} frames but only {t} are available.".format(
                n=len(ids), needed=needed, t=num_frames
            )
        )


def _extend(ids, blank):
    """Interleave blanks with the target and mark the states that can be skipped into."""
    ext = np.full(2 * len(ids) + 1, blank, dtype=int)
    ext[1::2] = ids
    skip = np.zeros(len(ext), dtype=bool)
    skip[3::2] = ext[3::2] != ext[1:-2:2]
    return ext, skip


def _log_probs(data):
    return np.log(np.maximum(data, PROB_FLOOR))


def _forward(lp_ext, skip):
    """Log forward variables, T x S."""
    num_frames, num_states = lp_ext.shape
    alpha = np.full((num_frames, num_states), -np.inf)
    alpha[0, :2] = lp_ext[0, :2]
    for t in range(1, num_frames):
        a = alpha[t - 1]
        acc = a.copy()
        acc[1:] = np.logaddexp(acc[1:], a[:-1])
        acc[2:] = np.where(skip[2:], np.logaddexp(acc[2:], a[:-2]), acc[2:])
        alpha[t] = acc + lp_ext[t]
    return alpha


def _backward(lp_ext, skip):
    """Log backward variables, T x S, including the emission at frame t."""
    num_frames, num_states = lp_ext.shape
    beta = np.full((num_frames, num_states), -np.inf)
    beta[-1, -2:] = lp_ext[-1, -2:]
    for t in range(num_frames - 2, -1, -1):
        b = beta[t + 1]
        acc = b.copy()
        acc[:-1] = np.logaddexp(acc[:-1], b[1:])
        acc[:-2] = np.where(skip[2:], np.logaddexp(acc[:-2], b[2:]), acc[:-2])
        beta[t] = acc + lp_ext[t]
    return beta


def _ctc_occupancy(data, ids, blank):
    """
    CTC loss and its gradient with respect to each log-probability taken
    as an independent variable (minus the expected symbol occupancy).
    """
    ext, skip = _extend(ids, blank)
    lp = _log_probs(data)
    lp_ext = lp[ext].T
    alpha = _forward(lp_ext, skip)
    beta = _backward(lp_ext, skip)
    log_z = np.logaddexp(alpha[-1, -1], alpha[-1, -2])

    gamma = np.exp(alpha + beta - lp_ext - log_z)
    grad = np.zeros_like(data)
    for s, sym in enumerate(ext):
        grad[sym] -= gamma[:, s]
    return float(-log_z), grad


def _project(grad_lp, data):
    """Map a gradient w.r.t. free log-probabilities through the per-frame softmax."""
    return grad_lp - data * grad_lp.sum(axis=0, keepdims=True)


def ctc_loss(emissions, target):
    """
    Negative log-likelihood of a target under CTC.

    Args:
        emissions: EmissionMatrix, V x T.
        target: Label sequence (symbols or vocabulary ids), without blanks.

    Returns:
        The loss and its V x T gradient w.r.t. the log-probabilities.

    Raises:
        InfeasibleTargetError: T is too short for the target.
    """
    ids = _target_ids(emissions, target)
    _check_feasible(ids, emissions.num_frames)
    loss, grad_lp = _ctc_occupancy(emissions.data, ids, emissions.blank)
    return loss, _project(grad_lp, emissions.data)


def _mask_array(emissions, mask):
    m = mask.data if isinstance(mask, AlignmentMask) else np.asarray(mask)
    if m.shape != emissions.shape:
        raise DomainError(
            "Mask shape {m} doesn't match the emission shape {p}.".format(m=m.shape, p=emissions.shape)
        )
    return (m != 0).astype(float)


def mask_emissions(emissions, mask, epsilon=1e-8):
    """
    Concentrate the probability of anchored frames on their anchored symbol.

    In a frame with at least one mask bit, every probability becomes
    (P*M + eps) / (sum(P*M) + eps) and the column is then rescaled to sum
    to 1. Frames without mask bits are copied unchanged.

    Args:
        emissions: EmissionMatrix, V x T.
        mask: Vocabulary-space AlignmentMask (or 0/1 array), V x T.
        epsilon: Smoothing constant, > 0.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be > 0, got {epsilon}.".format(**locals()))
    m = _mask_array(emissions, mask)
    p = emissions.data
    out = p.copy()
    cols = np.flatnonzero(m.any(axis=0))
    if cols.size:
        pm = p[:, cols] * m[:, cols]
        q = (pm + epsilon) / (pm.sum(axis=0, keepdims=True) + epsilon)
        out[:, cols] = q / q.sum(axis=0, keepdims=True)
    return EmissionMatrix(emissions.vocab, out)


def _mask_backward(grad_q, emissions, m, epsilon):
    """
    Carry a gradient w.r.t. the free log-probabilities of the masked
    emissions back to the free log-probabilities of the originals.
    """
    p = emissions.data
    grad = grad_q.copy()
    cols = np.flatnonzero(m.any(axis=0))
    if cols.size:
        pm = p[:, cols] * m[:, cols]
        denom = pm.sum(axis=0, keepdims=True) + p.shape[0] * epsilon
        g = grad_q[:, cols]
        grad[:, cols] = m[:, cols] * (
            pm / (pm + epsilon) * g - pm / denom * g.sum(axis=0, keepdims=True)
        )
    return grad


def _anchors(m):
    cols = np.flatnonzero(m.any(axis=0))
    return cols, np.argmax(m[:, cols], axis=0)


def ce_anchored(emissions, mask):
    """
    Mean cross-entropy over the anchored frames against their anchored symbol.

    Returns:
        The loss (0 when nothing is anchored) and its gradient w.r.t. the
        log-probabilities.
    """
    m = _mask_array(emissions, mask)
    cols, classes = _anchors(m)
    grad = np.zeros_like(emissions.data)
    if cols.size == 0:
        return 0.0, grad
    lp = _log_probs(emissions.data)
    loss = float(-np.mean(lp[classes, cols]))
    grad[:, cols] = emissions.data[:, cols]
    grad[classes, cols] -= 1.0
    grad[:, cols] /= cols.size
    return loss, grad


def lcs_ctc_loss(emissions, mask, target, lam=0.5, epsilon=1e-8):
    """
    lam * anchored CE + (1 - lam) * CTC over the masked emissions.

    Args:
        emissions: EmissionMatrix, V x T.
        mask: Vocabulary-space AlignmentMask, V x T.
        target: Label sequence.
        lam: Weight of the CE term, in [0, 1].
        epsilon: Mask smoothing constant.

    Returns:
        A LossBreakdown and the gradient of the total w.r.t. the log-probabilities.
    """
    if not 0.0 <= lam <= 1.0:
        raise DomainError("lambda must lie in [0, 1], got {lam}.".format(**locals()))
    m = _mask_array(emissions, mask)
    ids = _target_ids(emissions, target)
    _check_feasible(ids, emissions.num_frames)

    ce, ce_grad = ce_anchored(emissions, m)

    masked = mask_emissions(emissions, m, epsilon)
    ctc, grad_q = _ctc_occupancy(masked.data, ids, emissions.blank)
    ctc_grad = _project(_mask_backward(grad_q, emissions, m, epsilon), emissions.data)

    total = lam * ce + (1.0 - lam) * ctc
    grad = lam * ce_grad + (1.0 - lam) * ctc_grad
    num_anchored = int(m.any(axis=0).sum())
    return LossBreakdown(ctc, ce, total, lam, num_anchored), grad


class LcsCtcObjective(Configurable):
    """The combined objective with configurable weight and smoothing."""

    lam = 0.5
    epsilon = 1e-8

    config_fields = ["lam", "epsilon"]

    def __call__(self, emissions, mask, target):
        return lcs_ctc_loss(emissions, mask, target, self.lam, self.epsilon)


def viterbi_path(emissions, target):
    """
    Most probable CTC path emitting the target.

    Ties are broken toward emitting labels as early as possible.

    Returns:
        Log-probability of the path and the extended-sequence state visited
        at each frame (odd states are labels, even states are blanks).
    """
    ids = _target_ids(emissions, target)
    _check_feasible(ids, emissions.num_frames)
    ext, skip = _extend(ids, emissions.blank)
    lp_ext = _log_probs(emissions.data)[ext].T
    num_frames, num_states = lp_ext.shape

    delta = np.full((num_frames, num_states), -np.inf)
    back = np.zeros((num_frames, num_states), dtype=int)
    delta[0, :2] = lp_ext[0, :2]
    for t in range(1, num_frames):
        d = delta[t - 1]
        stay = d
        step = np.concatenate(([-np.inf], d[:-1]))
        jump = np.concatenate(([-np.inf, -np.inf], d[:-2]))
        jump = np.where(skip, jump, -np.inf)
        # argmax keeps the first maximum: stay, then step, then jump.
        cands = np.vstack((stay, step, jump))
        choice = np.argmax(cands, axis=0)
        delta[t] = cands[choice, np.arange(num_states)] + lp_ext[t]
        back[t] = np.arange(num_states) - choice

    # End in the final blank on ties.
    s = num_states - 1 if delta[-1, -1] >= delta[-1, -2] else num_states - 2
    log_prob = float(delta[-1, s])
    states = [s]
    for t in range(num_frames - 1, 0, -1):
        s = back[t, s]
        states.append(s)
    states.reverse()
    return log_prob, states


def viterbi_align(emissions, target):
    """Segment the frames along the most probable CTC path for the target."""
    _, states = viterbi_path(emissions, target)
    ids = _target_ids(emissions, target)
    vocab = emissions.vocab
    seg = Segmentation()
    onset = 0
    for t in range(1, len(states) + 1):
        if t < len(states) and states[t] == states[onset]:
            continue
        s = states[onset]
        if s % 2 == 1:
            seg.append(Span(vocab[ids[s // 2]], onset, t))
        onset = t
    return seg


def greedy_decode(emissions):
    """Best-path decoding: per-frame argmax, repeats merged, blanks dropped."""
    best = np.argmax(emissions.data, axis=0)
    vocab = emissions.vocab
    labels = []
    prev = None
    for k in best:
        if k != prev and k != emissions.blank:
            labels.append(vocab[k])
        prev = k
    return labels


def segmentation_mask(seg, vocab, num_frames):
    """
    Full-frame vocabulary mask from a segmentation: each frame anchored to
    its ground-truth phoneme, or to the blank outside every span.
    """
    vocab = list(getattr(vocab, "vocab", vocab))
    data = np.zeros((len(vocab), num_frames), dtype=int)
    data[EmissionMatrix.blank] = 1
    for phoneme, onset, offset in seg:
        try:
            row = vocab.index(phoneme)
        except ValueError:
            raise DomainError("Segment phoneme '{phoneme}' isn't in the vocabulary.".format(**locals()))
        frames = slice(onset, min(offset, num_frames))
        data[:, frames] = 0
        data[row, frames] = 1
    return AlignmentMask(vocab, data)


BruteForceResult = namedtuple("BruteForceResult", "loss best_log_prob best_path")


@functools.lru_cache(maxsize=None)
def _enumerate_paths(num_symbols, num_frames, blank):
    paths = np.array(list(itertools.product(range(num_symbols), repeat=num_frames)), dtype=int)
    collapsed = []
    for path in paths.tolist():
        labels = [k for k, _ in itertools.groupby(path) if k != blank]
        collapsed.append(tuple(labels))
    return paths, collapsed


def brute_force_ctc(emissions, target):
    """
    CTC loss and best path by enumerating every V^T path. Only for tiny
    problems; the same probability floor as ctc_loss() is applied.

    Returns:
        BruteForceResult(loss, best_log_prob, best_path). The loss is inf when
        no path emits the target.
    """
    num_symbols, num_frames = emissions.shape
    if num_symbols ** num_frames > BRUTE_FORCE_MAX_PATHS:
        raise DomainError(
            "Enumerating {v}^{t} paths is too many.".format(v=num_symbols, t=num_frames)
        )
    ids = tuple(_target_ids(emissions, target).tolist())
    paths, collapsed = _enumerate_paths(num_symbols, num_frames, emissions.blank)
    keep = np.array([c == ids for c in collapsed])
    if not keep.any():
        return BruteForceResult(float("inf"), float("-inf"), None)

    lp = _log_probs(emissions.data)
    path_lp = lp[paths[keep], np.arange(num_frames)].sum(axis=1)
    best = int(np.argmax(path_lp))
    return BruteForceResult(
        float(-np.logaddexp.reduce(path_lp)), float(path_lp[best]), paths[keep][best].tolist()
    )
