# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
A small end-to-end playground: synthetic utterances, a linear per-frame
softmax classifier, and full-batch gradient descent under vanilla CTC,
LCS-CTC or CE-CTC.
"""

import io
import json
import logging
from collections import namedtuple

import numpy as np

from .align import expand_mask, find_valid_matches, lcs_align
from .config import Configurable
from .cost import cost_from_emissions, synthesize_predicted_cost
from .ctc import (
    ce_anchored,
    ctc_loss,
    greedy_decode,
    lcs_ctc_loss,
    segmentation_mask,
    viterbi_align,
)
from .errors import DomainError, ParseError, TrainingDivergedError
from .matrix import CostMatrix, EmissionMatrix
from .metrics import EvalItem, PeakinessStats, corpus_report, peakiness_stats
from .phonemes import BLANK, build_similarity_table
from .segmentation import Segmentation, Span

__all__ = [
    "DEFAULT_SUBSET",
    "SyntheticUtterance",
    "SyntheticDataset",
    "LinearModel",
    "ToyTrainer",
    "gen_synthetic",
    "train",
    "evaluate",
    "plot_emissions",
    "read_dataset",
    "write_dataset",
    "read_model",
    "write_model",
]

logger = logging.getLogger(__name__)

OBJECTIVES = ("vanilla_ctc", "lcs_ctc", "ce_ctc")
MASK_REFRESH = ("static", "epoch")

# Phonemes used when no subset is requested.
DEFAULT_SUBSET = ["IH", "N", "S", "ER", "T", "AH"]

SyntheticUtterance = namedtuple("SyntheticUtterance", "features target segmentation cost")


class SyntheticDataset(list):
    """
    A list of SyntheticUtterances sharing a vocabulary (blank first) and a
    set of feature prototypes (one per phoneme plus one for silence).
    """

    def __init__(self, utterances=(), vocab=None, prototypes=None):
        super().__init__(utterances)
        self.vocab = list(vocab or [])
        self.prototypes = None if prototypes is None else np.asarray(prototypes, dtype=float)

    @property
    def num_features(self):
        return self.prototypes.shape[1]

    def like(self, utterances):
        """Return a dataset holding other utterances with the same vocab and prototypes."""
        return SyntheticDataset(utterances, self.vocab, self.prototypes)

    def split(self, n):
        """Split into the first n utterances and the rest."""
        return self.like(self[:n]), self.like(self[n:])

    def to_json(self):
        return {
            "vocab": self.vocab,
            "prototypes": self.prototypes.tolist(),
            "utterances": [
                {
                    "features": u.features.tolist(),
                    "target": list(u.target),
                    "segmentation": u.segmentation.to_json(),
                    "cost": u.cost.to_json(),
                }
                for u in self
            ],
        }

    @classmethod
    def from_json(cls, obj):
        try:
            utterances = [
                SyntheticUtterance(
                    np.asarray(u["features"], dtype=float),
                    list(u["target"]),
                    Segmentation.from_json(u["segmentation"]),
                    CostMatrix.from_json(u["cost"]),
                )
                for u in obj["utterances"]
            ]
            return cls(utterances, obj["vocab"], obj["prototypes"])
        except (KeyError, TypeError) as e:
            raise ParseError("Malformed dataset JSON: {e}".format(e=e))


def _draw_sequence(rng, symbols, length):
    """Random phoneme sequence with no symbol repeated back-to-back."""
    seq = []
    for _ in range(length):
        choices = [s for s in symbols if not seq or s != seq[-1]]
        seq.append(choices[rng.integers(len(choices))])
    return seq


def _insert_dysfluency(rng, symbols, seq):
    """Insert one extraneous phoneme that differs from its neighbors."""
    pos = int(rng.integers(len(seq) + 1))
    neighbors = set(seq[max(0, pos - 1) : pos + 1])
    choices = [s for s in symbols if s not in neighbors]
    return seq[:pos] + [choices[rng.integers(len(choices))]] + seq[pos:]


def gen_synthetic(
    num_utts=200,
    vocab_subset=None,
    mean_span_frames=8,
    feature_noise=0.3,
    dysfluency_rate=0.0,
    rng_seed=0,
    cost_noise=0.1,
    min_len=3,
    max_len=6,
    num_features=None,
    sim=None,
):
    """
    Generate synthetic utterances.

    Each frame's features are the prototype of its phoneme (or of silence)
    plus Gaussian noise. Utterances start and end with a few silence frames.
    With probability dysfluency_rate an extra phoneme is spoken: it appears
    in the features and segmentation but not in the target.

    Args:
        num_utts: Number of utterances.
        vocab_subset: Phonemes to use. Defaults to DEFAULT_SUBSET.
        mean_span_frames: Mean phoneme duration in frames.
        feature_noise: Standard deviation of the feature noise.
        dysfluency_rate: Probability of an inserted phoneme, in [0, 1].
        rng_seed: Seed; the same seed gives the same dataset.
        cost_noise: Noise level of the synthesized cost matrices. These are
            built from the unattenuated target cost, so every ground-truth
            cell sits within cost_noise of 0.
        min_len, max_len: Range of target lengths.
        num_features: Feature dimension. Defaults to twice the number of
            prototypes.
        sim: SimilarityTable.

    Returns:
        SyntheticDataset.
    """
    if not 0.0 <= dysfluency_rate <= 1.0:
        raise DomainError("dysfluency_rate must lie in [0, 1], got {dysfluency_rate}.".format(**locals()))
    if mean_span_frames < 1:
        raise DomainError("mean_span_frames must be >= 1.")
    if not 1 <= min_len <= max_len:
        raise DomainError("Need 1 <= min_len <= max_len.")
    symbols = list(vocab_subset or DEFAULT_SUBSET)
    if len(set(symbols)) < 3:
        raise DomainError("The phoneme subset needs at least 3 distinct phonemes.")
    sim = sim or build_similarity_table()
    for sym in symbols:
        sim.index(sym)

    rng = np.random.default_rng(rng_seed)
    vocab = [BLANK] + symbols
    num_protos = len(symbols) + 1
    num_features = num_features or 2 * num_protos
    prototypes = rng.normal(size=(num_protos, num_features))
    prototypes *= 2.0 / np.linalg.norm(prototypes, axis=1, keepdims=True)
    silence = len(symbols)

    dataset = SyntheticDataset(vocab=vocab, prototypes=prototypes)
    for _ in range(num_utts):
        target = _draw_sequence(rng, symbols, int(rng.integers(min_len, max_len + 1)))
        spoken = target
        if rng.random() < dysfluency_rate:
            spoken = _insert_dysfluency(rng, symbols, target)

        # Lay out the spans between leading and trailing silence.
        frame = int(rng.integers(1, 4))
        seg = Segmentation()
        proto_idx = [silence] * frame
        for sym in spoken:
            dur = 1 + int(rng.poisson(mean_span_frames - 1))
            seg.append(Span(sym, frame, frame + dur))
            proto_idx += [symbols.index(sym)] * dur
            frame += dur
        trailing = int(rng.integers(1, 4))
        proto_idx += [silence] * trailing
        num_frames = frame + trailing

        features = prototypes[proto_idx] + rng.normal(scale=feature_noise, size=(num_frames, num_features))
        cost = synthesize_predicted_cost(
            seg,
            target,
            sim,
            noise_level=cost_noise,
            rng_seed=int(rng.integers(2 ** 32)),
            num_frames=num_frames,
            attenuate=False,
        )
        dataset.append(SyntheticUtterance(features, target, seg, cost))

    logger.info("Generated %d synthetic utterances over %d phonemes", num_utts, len(symbols))
    return dataset


class LinearModel(object):
    """
    Per-frame linear softmax classifier. The weights are (F + 1) x V with a
    constant-1 input feature supplying the biases.
    """

    def __init__(self, vocab, num_features, weights=None):
        self.vocab = list(vocab)
        if weights is None:
            weights = np.zeros((num_features + 1, len(self.vocab)))
        self.weights = np.array(weights, dtype=float)
        if self.weights.shape != (num_features + 1, len(self.vocab)):
            raise DomainError("Weight shape {s} doesn't fit the model.".format(s=self.weights.shape))

    @property
    def num_features(self):
        return self.weights.shape[0] - 1

    @staticmethod
    def _inputs(features):
        features = np.asarray(features, dtype=float)
        return np.hstack((features, np.ones((features.shape[0], 1))))

    def logits(self, features):
        """V x T logits for a T x F feature array."""
        return (self._inputs(features) @ self.weights).T

    def emissions(self, features):
        return EmissionMatrix.from_logits(self.vocab, self.logits(features))

    def weight_gradient(self, features, grad_logits):
        """Gradient w.r.t. the weights given the V x T gradient w.r.t. the logits."""
        return self._inputs(features).T @ grad_logits.T

    def to_json(self):
        return {"vocab": self.vocab, "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj):
        try:
            weights = np.asarray(obj["weights"], dtype=float)
            return cls(obj["vocab"], weights.shape[0] - 1, weights)
        except (KeyError, TypeError, IndexError) as e:
            raise ParseError("Malformed model JSON: {e}".format(e=e))


class ToyTrainer(Configurable):
    """
    Full-batch gradient descent of a LinearModel. The update uses the
    gradient summed over utterances and divided by the total frame count.
    """

    objective = "lcs_ctc"
    epochs = 30
    learning_rate = 0.5
    lam = 0.5
    tol = 1.0
    cost_floor = 0.05
    epsilon = 1e-8
    mask_refresh = "static"

    config_fields = [
        "objective",
        "epochs",
        "learning_rate",
        "lam",
        "tol",
        "cost_floor",
        "epsilon",
        "mask_refresh",
    ]

    def __init__(self, sim=None, **kwargs):
        super().__init__(**kwargs)
        if self.objective not in OBJECTIVES:
            raise DomainError(
                "Unknown objective '{o}'; use one of {all}.".format(o=self.objective, all=", ".join(OBJECTIVES))
            )
        if self.mask_refresh not in MASK_REFRESH:
            raise DomainError("Unknown mask refresh mode '{m}'.".format(m=self.mask_refresh))
        if self.epochs < 0 or self.learning_rate < 0:
            raise DomainError("epochs and learning_rate must be >= 0.")
        if not 0.0 <= self.lam <= 1.0:
            raise DomainError("lambda must lie in [0, 1].")
        if self.tol <= 0:
            raise DomainError("tol must be > 0, got {tol}.".format(tol=self.tol))
        if self.cost_floor < 0:
            raise DomainError("cost_floor must be >= 0, got {f}.".format(f=self.cost_floor))
        self.sim = sim or build_similarity_table()

    def compute_masks(self, dataset, model=None):
        """
        Vocabulary-space alignment masks for each utterance, from the
        synthesized costs or, with a model, from the model's own emissions.
        """
        masks = []
        for utt in dataset:
            if model is None:
                cost = utt.cost
            else:
                cost = cost_from_emissions(model.emissions(utt.features), utt.target)
            valid = find_valid_matches(cost, utt.target, self.sim, self.tol, self.cost_floor)
            mask = expand_mask(lcs_align(valid), dataset.vocab)
            logger.debug("mask anchors %d of %d frames", int(mask.data.any(axis=0).sum()), mask.num_frames)
            masks.append(mask)
        return masks

    def utterance_loss(self, emissions, utt, mask=None):
        """Loss and logit gradient of one utterance under the objective."""
        if self.objective == "vanilla_ctc":
            return ctc_loss(emissions, utt.target)
        if self.objective == "lcs_ctc":
            breakdown, grad = lcs_ctc_loss(emissions, mask, utt.target, self.lam, self.epsilon)
            return breakdown.total, grad
        full = segmentation_mask(utt.segmentation, emissions.vocab, emissions.num_frames)
        ce, ce_grad = ce_anchored(emissions, full)
        ctc, ctc_grad = ctc_loss(emissions, utt.target)
        return self.lam * ce + (1.0 - self.lam) * ctc, self.lam * ce_grad + (1.0 - self.lam) * ctc_grad

    def train(self, dataset, model=None, masks=None):
        """
        Train a model.

        Args:
            dataset: Non-empty SyntheticDataset.
            model: Starting LinearModel. Defaults to all-zero weights.
            masks: Precomputed vocabulary-space masks (lcs_ctc only). They
                override mask computation, including per-epoch refresh.

        Returns:
            The trained model and the list of per-epoch mean losses, each
            measured before that epoch's update.

        Raises:
            TrainingDivergedError: A loss or gradient isn't finite.
        """
        if not len(dataset):
            raise DomainError("Can't train on an empty dataset.")
        model = model or LinearModel(dataset.vocab, dataset.num_features)
        fixed_masks = masks is not None
        if self.objective == "lcs_ctc" and not fixed_masks:
            masks = self.compute_masks(dataset)
        total_frames = sum(u.features.shape[0] for u in dataset)

        log = []
        for epoch in range(self.epochs):
            if self.objective == "lcs_ctc" and self.mask_refresh == "epoch" and not fixed_masks and epoch > 0:
                masks = self.compute_masks(dataset, model)

            loss_sum = 0.0
            grad_w = np.zeros_like(model.weights)
            for k, utt in enumerate(dataset):
                logits = model.logits(utt.features)
                if not np.all(np.isfinite(logits)):
                    raise TrainingDivergedError("Non-finite logits in epoch {epoch}.".format(**locals()))
                emissions = EmissionMatrix.from_logits(model.vocab, logits)
                loss, grad = self.utterance_loss(emissions, utt, masks[k] if masks else None)
                loss_sum += loss
                grad_w += model.weight_gradient(utt.features, grad)

            mean_loss = loss_sum / len(dataset)
            if not np.isfinite(mean_loss) or not np.all(np.isfinite(grad_w)):
                raise TrainingDivergedError(
                    "Training diverged in epoch {epoch} with mean loss {mean_loss}.".format(**locals())
                )
            log.append(float(mean_loss))
            logger.info("epoch %d: mean %s loss %.6f", epoch, self.objective, mean_loss)
            model.weights -= self.learning_rate * grad_w / total_frames

        return model, log


def train(dataset, objective="lcs_ctc", epochs=30, learning_rate=0.5, lam=0.5, tol=1.0, **kwargs):
    """Train a LinearModel with a ToyTrainer configured by the arguments."""
    trainer = ToyTrainer(
        objective=objective, epochs=epochs, learning_rate=learning_rate, lam=lam, tol=tol, **kwargs
    )
    return trainer.train(dataset)


def evaluate(model, dataset, sim=None, frame_ms=1.0):
    """
    Evaluate a model on held-out utterances.

    Greedy decoding is scored against the targets (PER, WPER) and the
    Viterbi segmentation of each target against the ground-truth spans
    (boundary loss, in frames at the default frame_ms of 1).

    Returns:
        Dict with per, wper, bl_frames, peakiness (PeakinessStats averaged
        over utterances) and num_utterances.
    """
    sim = sim or build_similarity_table()
    items = []
    stats = []
    for k, utt in enumerate(dataset):
        emissions = model.emissions(utt.features)
        items.append(
            EvalItem(k, utt.target, greedy_decode(emissions), utt.segmentation, viterbi_align(emissions, utt.target))
        )
        stats.append(peakiness_stats(emissions))
    _, summary = corpus_report(items, sim, frame_ms)
    peakiness = PeakinessStats(*np.mean(np.array(stats, dtype=float), axis=0).tolist())
    return {
        "per": summary["per"],
        "wper": summary["wper"],
        "bl_frames": summary["boundary_ms"],
        "peakiness": peakiness,
        "num_utterances": len(items),
    }


def plot_emissions(emissions, seg=None, **kwargs):
    """
    Plot per-frame probabilities of every vocabulary symbol, shading the
    ground-truth spans if a segmentation is given.

    Keywords Args:
        Passed to EmissionMatrix.to_matplotlib().

    Returns:
        Figure and axes created by matplotlib.pyplot.subplots.
    """
    kwargs.setdefault("title", "Emissions")
    fig, axes = emissions.to_matplotlib(*emissions.vocab, **kwargs)
    for i, (phoneme, onset, offset) in enumerate(seg or []):
        axes.axvspan(onset - 0.5, offset - 0.5, color="C{}".format(i % 2 + 7), alpha=0.15)
        axes.text((onset + offset - 1) / 2, 1.02, phoneme, ha="center", va="bottom", fontsize="small")
    axes.set_ylim(0, 1.1)
    axes.set_ylabel("probability")
    return fig, axes


def read_dataset(path):
    with io.open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except ValueError as e:
            raise ParseError("{path}: not valid JSON: {e}".format(path=path, e=e))
    return SyntheticDataset.from_json(obj)


def write_dataset(dataset, path):
    with io.open(path, "w", encoding="utf-8") as f:
        json.dump(dataset.to_json(), f)
    logger.info("Wrote %d utterances to %s", len(dataset), path)


def read_model(path):
    """Read a model file; returns the LinearModel and the stored training info."""
    with io.open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except ValueError as e:
            raise ParseError("{path}: not valid JSON: {e}".format(path=path, e=e))
    return LinearModel.from_json(obj), {k: v for k, v in obj.items() if k not in ("vocab", "weights")}


def write_model(model, path, **info):
    """Write a model file. Extra keywords (objective, training log, ...) are stored alongside."""
    obj = model.to_json()
    obj.update(info)
    with io.open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=1)
    logger.info("Wrote model to %s", path)
