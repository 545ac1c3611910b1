# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
Finite-difference checks of the analytic loss gradients.
"""

import logging
from collections import namedtuple

import numpy as np
import pandas as pd

from .ctc import ce_anchored, ctc_loss, lcs_ctc_loss, min_frames
from .errors import DomainError
from .matrix import EmissionMatrix

__all__ = [
    "GradCheckCase",
    "numeric_gradient",
    "relative_error",
    "random_case",
    "check_case",
    "check_gradients",
]

logger = logging.getLogger(__name__)

OBJECTIVES = ("ctc", "ce", "lcs_ctc")

# One randomized problem. logits are the log-probabilities up to a per-frame constant.
GradCheckCase = namedtuple("GradCheckCase", "objective vocab logits mask target lam epsilon")


def _loss_fn(case):
    """Return a function mapping a V x T logit array to (loss, gradient)."""

    def fn(logits):
        p = EmissionMatrix.from_logits(case.vocab, logits)
        if case.objective == "ctc":
            return ctc_loss(p, case.target)
        if case.objective == "ce":
            return ce_anchored(p, case.mask)
        breakdown, grad = lcs_ctc_loss(p, case.mask, case.target, case.lam, case.epsilon)
        return breakdown.total, grad

    return fn


def numeric_gradient(fn, logits, h=1e-5):
    """Central-difference gradient of fn(logits)[0] w.r.t. every logit."""
    logits = np.array(logits, dtype=float)
    grad = np.zeros_like(logits)
    for idx in np.ndindex(*logits.shape):
        orig = logits[idx]
        logits[idx] = orig + h
        f_plus = fn(logits)[0]
        logits[idx] = orig - h
        f_minus = fn(logits)[0]
        logits[idx] = orig
        grad[idx] = (f_plus - f_minus) / (2 * h)
    return grad


def relative_error(analytic, numeric):
    """Largest absolute difference scaled by the larger of the two max-norms."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), np.finfo(float).tiny)
    return float(np.abs(analytic - numeric).max() / scale)


def random_case(rng, objective=None, max_symbols=5, max_frames=7, max_target=3):
    """
    Draw a small random problem.

    Args:
        rng: numpy Generator.
        objective: "ctc", "ce" or "lcs_ctc". Random if None.
    """
    if objective is None:
        objective = OBJECTIVES[rng.integers(len(OBJECTIVES))]
    if objective not in OBJECTIVES:
        raise DomainError("Unknown objective '{objective}'.".format(**locals()))

    num_symbols = int(rng.integers(3, max_symbols + 1))
    vocab = ["<blank>"] + ["s{}".format(k) for k in range(1, num_symbols)]

    # Keep drawing until the target fits in the frames.
    while True:
        num_frames = int(rng.integers(2, max_frames + 1))
        target_len = int(rng.integers(1, max_target + 1))
        target = rng.integers(1, num_symbols, size=target_len).tolist()
        if min_frames(target) <= num_frames:
            break

    logits = rng.normal(scale=1.5, size=(num_symbols, num_frames))

    # Anchor a random subset of frames to random target symbols.
    mask = np.zeros((num_symbols, num_frames), dtype=int)
    for t in np.flatnonzero(rng.random(num_frames) < 0.4):
        mask[target[int(rng.integers(len(target)))], t] = 1

    lam = float(rng.uniform(0.0, 1.0))
    epsilon = float(rng.choice([1e-8, 1e-3]))
    return GradCheckCase(objective, vocab, logits, mask, [vocab[k] for k in target], lam, epsilon)


def check_case(case, h=1e-5):
    """Return the relative error between analytic and numeric gradients for a case."""
    fn = _loss_fn(case)
    _, analytic = fn(case.logits)
    numeric = numeric_gradient(fn, case.logits, h)
    return relative_error(analytic, numeric)


def check_gradients(num_cases=100, seed=0, h=1e-5, objectives=OBJECTIVES):
    """
    Check the gradients of each objective on randomized small problems.

    Returns:
        Pandas DataFrame with one row per case: objective, num_symbols,
        num_frames, target_len and rel_error.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(num_cases):
        case = random_case(rng, objectives[i % len(objectives)])
        err = check_case(case, h)
        logger.debug("case %d (%s): relative error %.3g", i, case.objective, err)
        rows.append(
            (case.objective, len(case.vocab), case.logits.shape[1], len(case.target), err)
        )
    df = pd.DataFrame(
        rows, columns=["objective", "num_symbols", "num_frames", "target_len", "rel_error"]
    )
    logger.info("Gradient check: %d cases, max relative error %.3g", len(df), df["rel_error"].max())
    return df
