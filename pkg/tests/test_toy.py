#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_toy
----------------------------------

Tests for the synthetic data generator and the toy trainer.
"""

import numpy as np
import pytest

from lcsctc.cost import build_target_cost
from lcsctc.errors import DomainError, TrainingDivergedError
from lcsctc.matrix import AlignmentMask
from lcsctc.toy import (
    OBJECTIVES,
    LinearModel,
    ToyTrainer,
    evaluate,
    gen_synthetic,
    plot_emissions,
    read_dataset,
    read_model,
    train,
    write_dataset,
    write_model,
)


def test_clean_generation(sim):
    dataset = gen_synthetic(num_utts=20, rng_seed=1, sim=sim)
    assert len(dataset) == 20
    assert dataset.vocab[0] == "<blank>"
    for utt in dataset:
        assert utt.segmentation.phonemes() == utt.target
        num_frames = utt.features.shape[0]
        assert utt.cost.shape == (len(utt.target), num_frames)
        assert utt.segmentation[0].onset >= 1
        assert utt.segmentation[-1].offset < num_frames
        utt.segmentation.validate(num_frames)
        assert all(a != b for a, b in zip(utt.target, utt.target[1:]))


def test_generation_is_deterministic(sim):
    a = gen_synthetic(num_utts=5, rng_seed=8, sim=sim)
    b = gen_synthetic(num_utts=5, rng_seed=8, sim=sim)
    for ua, ub in zip(a, b):
        assert np.array_equal(ua.features, ub.features)
        assert ua.target == ub.target
        assert ua.cost == ub.cost


def test_dysfluent_generation(sim):
    dataset = gen_synthetic(num_utts=20, dysfluency_rate=1.0, rng_seed=2, sim=sim)
    for utt in dataset:
        spoken = utt.segmentation.phonemes()
        assert len(spoken) == len(utt.target) + 1
        assert all(a != b for a, b in zip(spoken, spoken[1:]))


def test_generation_rejects_bad_arguments(sim):
    with pytest.raises(DomainError):
        gen_synthetic(num_utts=2, dysfluency_rate=1.5, sim=sim)
    with pytest.raises(DomainError):
        gen_synthetic(num_utts=2, vocab_subset=["IH", "N"], sim=sim)


def test_dataset_file(tmp_path, sim):
    dataset = gen_synthetic(num_utts=3, rng_seed=4, sim=sim)
    path = str(tmp_path / "data.json")
    write_dataset(dataset, path)
    copy = read_dataset(path)
    assert copy.vocab == dataset.vocab
    assert np.array_equal(copy.prototypes, dataset.prototypes)
    assert [u.target for u in copy] == [u.target for u in dataset]
    assert np.array_equal(copy[2].features, dataset[2].features)


def test_model_file(tmp_path):
    model = LinearModel(["<blank>", "IH"], 2, np.arange(6.0).reshape(3, 2))
    path = str(tmp_path / "model.json")
    write_model(model, path, objective="lcs_ctc", log=[1.0, 0.5])
    copy, info = read_model(path)
    assert np.array_equal(copy.weights, model.weights)
    assert info == {"objective": "lcs_ctc", "log": [1.0, 0.5]}


def test_zero_learning_rate(sim):
    dataset = gen_synthetic(num_utts=10, rng_seed=3, sim=sim)
    model, log = ToyTrainer(sim, objective="vanilla_ctc", epochs=3, learning_rate=0.0).train(dataset)
    assert not model.weights.any()
    assert log[0] == log[1] == log[2]


@pytest.mark.parametrize("objective", OBJECTIVES)
def test_loss_decreases(objective, sim):
    dataset = gen_synthetic(num_utts=30, rng_seed=6, sim=sim)
    _, log = ToyTrainer(sim, objective=objective, epochs=10).train(dataset)
    assert len(log) == 10
    assert log[-1] < log[0]


def test_unweighted_empty_masks_match_vanilla(sim):
    dataset = gen_synthetic(num_utts=15, rng_seed=9, sim=sim)
    masks = [
        AlignmentMask(dataset.vocab, np.zeros((len(dataset.vocab), u.features.shape[0]), dtype=int))
        for u in dataset
    ]
    lcs_model, lcs_log = ToyTrainer(sim, objective="lcs_ctc", lam=0.0, epochs=5).train(dataset, masks=masks)
    ctc_model, ctc_log = ToyTrainer(sim, objective="vanilla_ctc", epochs=5).train(dataset)
    assert lcs_log == ctc_log
    assert np.array_equal(lcs_model.weights, ctc_model.weights)


def test_trained_model_follows_anchors(sim):
    dataset = gen_synthetic(num_utts=60, rng_seed=10, sim=sim)
    # Noise-free costs with tol < 1 anchor exactly the ground-truth spans.
    dataset = dataset.like(
        u._replace(
            cost=build_target_cost(
                u.segmentation, u.target, sim, attenuate=False, num_frames=u.features.shape[0]
            )
        )
        for u in dataset
    )
    trainer = ToyTrainer(sim, objective="lcs_ctc", epochs=60, tol=0.9)
    model, _ = trainer.train(dataset)
    hits = total = 0
    for utt, mask in zip(dataset, trainer.compute_masks(dataset)):
        best = np.argmax(model.emissions(utt.features).data, axis=0)
        for row, frame in mask.cells():
            hits += best[frame] == row
            total += 1
    assert total > 0
    assert hits / total >= 0.9


def test_default_span_length_gives_forty_frames(sim):
    dataset = gen_synthetic(num_utts=200, sim=sim)
    assert abs(np.mean([u.features.shape[0] for u in dataset]) - 40.0) < 3.0


def test_default_masks_anchor_only_ground_truth(sim):
    dataset = gen_synthetic(num_utts=100, rng_seed=11, sim=sim)
    hits = total = anchored = frames = 0
    for utt, mask in zip(dataset, ToyTrainer(sim).compute_masks(dataset)):
        truth = utt.segmentation.frame_labels(mask.num_frames)
        for row, frame in mask.cells():
            hits += dataset.vocab[row] == truth[frame]
            total += 1
        anchored += len(mask.anchored_frames())
        frames += mask.num_frames
    assert total > 0
    assert hits == total
    # About half the phoneme frames carry noise under the self-match floor.
    assert 0.35 < anchored / frames < 0.55


def test_unmatchable_thresholds_reduce_to_vanilla(sim):
    dataset = gen_synthetic(num_utts=15, rng_seed=9, sim=sim)
    trainer = ToyTrainer(sim, objective="lcs_ctc", lam=0.0, tol=1e-3, cost_floor=0.0, epochs=5)
    assert not any(mask.data.any() for mask in trainer.compute_masks(dataset))
    lcs_model, lcs_log = trainer.train(dataset)
    ctc_model, ctc_log = ToyTrainer(sim, objective="vanilla_ctc", epochs=5).train(dataset)
    assert lcs_log == ctc_log
    assert np.array_equal(lcs_model.weights, ctc_model.weights)


def test_lcs_ctc_beats_vanilla_on_dysfluent_speech(sim):
    scores = {"vanilla_ctc": [], "lcs_ctc": []}
    for seed in range(5):
        dataset = gen_synthetic(num_utts=200, dysfluency_rate=0.3, rng_seed=100 + seed, sim=sim)
        train_set, test_set = dataset.split(150)
        for objective, results in scores.items():
            model, _ = train(train_set, objective=objective, sim=sim)
            result = evaluate(model, test_set, sim)
            results.append(
                (
                    result["per"],
                    result["peakiness"].blank_frame_fraction,
                    result["peakiness"].mean_nonblank_run_length,
                )
            )
    lcs_per, lcs_blank, lcs_run = np.mean(scores["lcs_ctc"], axis=0)
    ctc_per, ctc_blank, ctc_run = np.mean(scores["vanilla_ctc"], axis=0)
    assert lcs_per < ctc_per
    assert lcs_blank < ctc_blank
    assert lcs_run > ctc_run


def test_evaluate(sim):
    dataset = gen_synthetic(num_utts=8, rng_seed=12, sim=sim)
    model = LinearModel(dataset.vocab, dataset.num_features)
    result = evaluate(model, dataset, sim)
    assert result["num_utterances"] == 8
    # An untrained model puts equal weight on every symbol and decodes nothing.
    assert result["per"] == 1.0
    assert result["peakiness"].blank_frame_fraction == 1.0


def test_diverged_training(sim):
    dataset = gen_synthetic(num_utts=4, rng_seed=13, sim=sim)
    model = LinearModel(dataset.vocab, dataset.num_features)
    model.weights[0, 0] = np.nan
    with pytest.raises(TrainingDivergedError):
        ToyTrainer(sim, objective="vanilla_ctc", epochs=1).train(dataset, model)


def test_trainer_rejects_bad_settings(sim):
    with pytest.raises(DomainError):
        ToyTrainer(sim, objective="hinge")
    with pytest.raises(DomainError):
        ToyTrainer(sim, lam=2.0)
    with pytest.raises(DomainError):
        ToyTrainer(sim, mask_refresh="always")
    with pytest.raises(DomainError):
        ToyTrainer(sim, tol=0.0)
    with pytest.raises(DomainError):
        ToyTrainer(sim, cost_floor=-0.1)
    with pytest.raises(DomainError):
        ToyTrainer(sim).train(gen_synthetic(num_utts=0, sim=sim))


def test_plot_emissions(sim):
    dataset = gen_synthetic(num_utts=1, rng_seed=14, sim=sim)
    model = LinearModel(dataset.vocab, dataset.num_features)
    utt = dataset[0]
    fig, axes = plot_emissions(model.emissions(utt.features), utt.segmentation)
    assert len(axes.lines) == len(dataset.vocab)
