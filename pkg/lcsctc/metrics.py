# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
Recognition and segmentation metrics: phoneme error rate, similarity-weighted
phoneme error rate, boundary loss and emission peakiness.
"""

import logging
from collections import namedtuple
from multiprocessing.pool import ThreadPool

import numpy as np
import pandas as pd

from .errors import DomainError
from .phonemes import build_similarity_table

__all__ = [
    "EditOps",
    "BoundaryReport",
    "PeakinessStats",
    "EvalItem",
    "UtteranceScore",
    "edit_ops",
    "per",
    "wper",
    "boundary_report",
    "boundary_loss",
    "peakiness_stats",
    "score_utterance",
    "corpus_report",
    "scores_to_dataframe",
]

logger = logging.getLogger(__name__)

# Operations in an edit alignment are (op, ref symbol, hyp symbol) with op one
# of "match", "sub", "del" or "ins"; the missing side is None.
EditOps = namedtuple("EditOps", "substitutions deletions insertions alignment distance")

BoundaryReport = namedtuple("BoundaryReport", "loss_ms matched unmatched_pred unmatched_ref")

PeakinessStats = namedtuple(
    "PeakinessStats", "blank_frame_fraction mean_nonblank_run_length mean_max_prob"
)

# One utterance to score. The segmentations are optional.
EvalItem = namedtuple("EvalItem", "id ref hyp ref_seg hyp_seg")
EvalItem.__new__.__defaults__ = (None, None)

UtteranceScore = namedtuple(
    "UtteranceScore",
    "id ref_len edits weighted_edits per wper boundary_ms boundary_sum_ms matched_spans unmatched_spans",
)


def _unit_cost(a, b):
    return 1.0


def edit_ops(ref, hyp, sub_cost=None):
    """
    Minimum-cost edit alignment of hyp against ref.

    Args:
        ref: Reference sequence.
        hyp: Hypothesis sequence.
        sub_cost: Function giving the cost of substituting b for a (a != b).
            Defaults to 1. Insertions and deletions always cost 1.

    Returns:
        EditOps for one optimal alignment. When tracing back, a match or
        substitution is preferred, then a deletion, then an insertion.
    """
    sub_cost = sub_cost or _unit_cost
    ref, hyp = list(ref), list(hyp)
    n, m = len(ref), len(hyp)

    d = np.zeros((n + 1, m + 1))
    d[:, 0] = np.arange(n + 1)
    d[0, :] = np.arange(m + 1)
    sub = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            sub[i, j] = 0.0 if ref[i] == hyp[j] else sub_cost(ref[i], hyp[j])
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d[i, j] = min(d[i - 1, j - 1] + sub[i - 1, j - 1], d[i - 1, j] + 1, d[i, j - 1] + 1)

    alignment = []
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i, j] == d[i - 1, j - 1] + sub[i - 1, j - 1]:
            op = "match" if ref[i - 1] == hyp[j - 1] else "sub"
            alignment.append((op, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and d[i, j] == d[i - 1, j] + 1:
            alignment.append(("del", ref[i - 1], None))
            i -= 1
        else:
            alignment.append(("ins", None, hyp[j - 1]))
            j -= 1
    alignment.reverse()

    return EditOps(
        substitutions=[(r, h) for op, r, h in alignment if op == "sub"],
        deletions=sum(op == "del" for op, _, _ in alignment),
        insertions=sum(op == "ins" for op, _, _ in alignment),
        alignment=alignment,
        distance=float(d[n, m]),
    )


def _check_ref(ref):
    if not len(ref):
        raise DomainError("The reference sequence is empty.")


def per(ref, hyp):
    """Phoneme error rate: unit-cost edit distance divided by the reference length."""
    _check_ref(ref)
    return edit_ops(ref, hyp).distance / len(ref)


def _weighted_cost(sim):
    def cost(a, b):
        return 1.0 - sim[a, b]

    return cost


def wper(ref, hyp, sim=None):
    """
    Weighted phoneme error rate. Substituting q for p costs 1 - s(p, q);
    insertions and deletions cost 1. The alignment is the optimum under
    these weighted costs.
    """
    _check_ref(ref)
    sim = sim or build_similarity_table()
    for sym in list(ref) + list(hyp):
        sim.index(sym)
    return edit_ops(ref, hyp, _weighted_cost(sim)).distance / len(ref)


def _boundary_sum(pred, ref):
    """Sum of per-span deviations (in frames) over label-matched span pairs."""
    ops = edit_ops(ref.phonemes(), pred.phonemes())
    total = 0.0
    matched = 0
    ri = pi = 0
    for op, _, _ in ops.alignment:
        if op == "match":
            r, p = ref[ri], pred[pi]
            total += (abs(p.onset - r.onset) + abs(p.offset - r.offset)) / 2.0
            matched += 1
        if op in ("match", "sub", "del"):
            ri += 1
        if op in ("match", "sub", "ins"):
            pi += 1
    return total, matched


def boundary_report(pred, ref, frame_ms=10.0):
    """
    Boundary loss with matching details.

    Predicted spans are paired with reference spans by an edit alignment of
    their labels and only exact label matches are scored. The loss is the
    mean over matched pairs of (|onset error| + |offset error|) / 2 in
    milliseconds, or NaN when nothing matched.

    Raises:
        DomainError: frame_ms <= 0, or both segmentations are empty.
    """
    if frame_ms <= 0:
        raise DomainError("frame_ms must be > 0, got {frame_ms}.".format(**locals()))
    if not pred and not ref:
        raise DomainError("Both segmentations are empty.")
    total, matched = _boundary_sum(pred, ref)
    loss = total / matched * frame_ms if matched else float("nan")
    return BoundaryReport(loss, matched, len(pred) - matched, len(ref) - matched)


def boundary_loss(pred, ref, frame_ms=10.0):
    """Boundary loss in milliseconds. See boundary_report()."""
    return boundary_report(pred, ref, frame_ms).loss_ms


def peakiness_stats(emissions):
    """
    How spiky the emissions are.

    Returns:
        PeakinessStats: the fraction of frames whose argmax is the blank, the
        mean length of runs of the same non-blank argmax (0 if none), and the
        mean of the per-frame maximum probability.
    """
    best = np.argmax(emissions.data, axis=0)
    blank = emissions.blank
    runs = []
    prev = None
    for k in best:
        if k != blank:
            if k == prev:
                runs[-1] += 1
            else:
                runs.append(1)
        prev = k
    return PeakinessStats(
        blank_frame_fraction=float(np.mean(best == blank)),
        mean_nonblank_run_length=float(np.mean(runs)) if runs else 0.0,
        mean_max_prob=float(np.mean(emissions.data.max(axis=0))),
    )


def score_utterance(item, sim=None, frame_ms=10.0):
    """Score one EvalItem."""
    sim = sim or build_similarity_table()
    _check_ref(item.ref)
    edits = edit_ops(item.ref, item.hyp).distance
    weighted = edit_ops(item.ref, item.hyp, _weighted_cost(sim)).distance
    boundary_ms = boundary_sum_ms = float("nan")
    matched = unmatched = 0
    if item.ref_seg is not None and item.hyp_seg is not None:
        report = boundary_report(item.hyp_seg, item.ref_seg, frame_ms)
        boundary_ms = report.loss_ms
        total, _ = _boundary_sum(item.hyp_seg, item.ref_seg)
        boundary_sum_ms = total * frame_ms
        matched = report.matched
        unmatched = report.unmatched_pred + report.unmatched_ref
    n = len(item.ref)
    return UtteranceScore(
        item.id, n, edits, weighted, edits / n, weighted / n, boundary_ms, boundary_sum_ms, matched, unmatched
    )


def corpus_report(items, sim=None, frame_ms=10.0, jobs=1):
    """
    Score a corpus of utterances.

    Args:
        items: Iterable of EvalItem.
        sim: SimilarityTable.
        frame_ms: Frame duration for boundary loss.
        jobs: Number of worker threads.

    Returns:
        The list of UtteranceScore and a dict of micro-averaged corpus
        figures: per, wper, boundary_ms, num_utterances, matched_spans,
        unmatched_spans.
    """
    items = list(items)
    sim = sim or build_similarity_table()

    def score(item):
        return score_utterance(item, sim, frame_ms)

    if jobs > 1:
        with ThreadPool(jobs) as pool:
            scores = pool.map(score, items)
    else:
        scores = [score(item) for item in items]

    ref_len = sum(s.ref_len for s in scores)
    matched = sum(s.matched_spans for s in scores)
    boundary_sum = sum(s.boundary_sum_ms for s in scores if s.matched_spans)
    summary = {
        "num_utterances": len(scores),
        "per": sum(s.edits for s in scores) / ref_len if ref_len else float("nan"),
        "wper": sum(s.weighted_edits for s in scores) / ref_len if ref_len else float("nan"),
        "boundary_ms": boundary_sum / matched if matched else float("nan"),
        "matched_spans": matched,
        "unmatched_spans": sum(s.unmatched_spans for s in scores),
    }
    logger.info(
        "Scored %d utterances: PER %.4f, WPER %.4f, BL %.2f ms",
        summary["num_utterances"],
        summary["per"],
        summary["wper"],
        summary["boundary_ms"],
    )
    return scores, summary


def scores_to_dataframe(scores):
    """Pandas DataFrame with one row per UtteranceScore."""
    return pd.DataFrame(list(scores), columns=UtteranceScore._fields)
