# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
Command-line interface: one subcommand per pipeline stage.

Exit status is 0 on success, 1 for usage errors and 2 for bad data.
"""

import argparse
import io
import json
import logging
import math
import sys
from collections import namedtuple

import matplotlib.pyplot as plt
import numpy as np

from .align import Aligner, expand_mask, tol_sweep
from .cost import TargetCostBuilder
from .ctc import LcsCtcObjective, greedy_decode, viterbi_align
from .errors import LcsCtcError, ParseError, UsageError
from .gradcheck import check_gradients
from .matrix import read_matrix, write_matrix
from .metrics import EvalItem, corpus_report, scores_to_dataframe
from .phonemes import build_similarity_table, default_inventory, load_inventory
from .segmentation import Segmentation, read_segmentation
from .toy import (
    ToyTrainer,
    evaluate,
    gen_synthetic,
    plot_emissions,
    read_dataset,
    read_model,
    write_dataset,
    write_model,
)

__all__ = ["RunConfig", "get_parser", "main"]

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s (%(module)s:%(lineno)d) %(levelname)s: %(message)s"

# What a subcommand was asked to do, for logging and reproducibility.
RunConfig = namedtuple("RunConfig", "subcommand inputs output params")

INPUT_FLAGS = ("segmentation", "cost", "emissions", "mask", "ref", "hyp", "data", "model", "labels_file", "phoneme_table")
PARAM_FLAGS = (
    "tol",
    "cost_floor",
    "lam",
    "epsilon",
    "edge_sigma",
    "frame_ms",
    "seed",
    "objective",
    "epochs",
    "lr",
    "dysfluency_rate",
    "num_utts",
)


class ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def _positive(text):
    value = float(text)
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be > 0, got {text}".format(**locals()))
    return value


def _non_negative(text):
    value = float(text)
    if not value >= 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be >= 0, got {text}".format(**locals()))
    return value


def _unit_interval(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1], got {text}".format(**locals()))
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1, got {text}".format(**locals()))
    return value


def _non_negative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0, got {text}".format(**locals()))
    return value


def _add_labels(parser, required=True):
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--labels", help="Space-separated ARPAbet labels (stress digits are ignored).")
    group.add_argument("--labels-file", help="File holding whitespace-separated ARPAbet labels.")


def _add_out(parser, help="Output file (default: standard output)."):
    parser.add_argument("--out", "-o", help=help)


def _add_synth(parser):
    group = parser.add_argument_group("synthetic data (used when --data isn't given)")
    group.add_argument("--num-utts", type=_positive_int, default=200)
    group.add_argument("--subset", help="Space-separated phonemes to use.")
    group.add_argument("--mean-span-frames", type=_positive, default=8.0)
    group.add_argument("--feature-noise", type=_non_negative, default=0.3)
    group.add_argument("--cost-noise", type=_non_negative, default=0.1)
    group.add_argument("--dysfluency-rate", type=_unit_interval, default=0.0)
    group.add_argument("--seed", type=int, default=0)


def get_parser():
    """Build the argument parser for the lcsctc command."""
    parser = ArgumentParser(
        prog="lcsctc",
        description="Partial LCS alignment and alignment-constrained CTC for phoneme recognition.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More logging (repeat for debug).")
    parser.add_argument("--phoneme-table", help="Phoneme-table file to use instead of the shipped one.")
    subs = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    subs.required = True
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = subs.add_parser("target", help="Build a target cost matrix from a segmentation.", formatter_class=fmt)
    p.add_argument("--segmentation", required=True, help="Segmentation JSON file.")
    _add_labels(p, required=False)
    p.add_argument("--num-frames", type=_positive_int, help="Number of frames (default: end of the last span).")
    p.add_argument("--edge-sigma", type=_positive, help="Edge attenuation width in frames.")
    p.add_argument("--no-attenuate", action="store_true", help="Skip the edge attenuation.")
    p.add_argument("--normalize", action="store_true", help="Softmax-normalize each row over time.")
    _add_out(p)
    p.set_defaults(func=cmd_target)

    p = subs.add_parser("align", help="Align labels to frames of a cost matrix.", formatter_class=fmt)
    p.add_argument("--cost", required=True, help="Cost matrix JSON file.")
    _add_labels(p, required=False)
    p.add_argument("--tol", type=_positive, default=1.0, help="Threshold tolerance.")
    p.add_argument("--cost-floor", type=_non_negative, default=0.05, help="Self-match cost threshold.")
    p.add_argument("--vocab-mask", action="store_true", help="Write the mask over the whole vocabulary.")
    _add_out(p)
    p.set_defaults(func=cmd_align)

    p = subs.add_parser("loss", help="Evaluate the LCS-CTC loss.", formatter_class=fmt)
    p.add_argument("--emissions", required=True, help="Emission matrix JSON file.")
    p.add_argument("--mask", help="Alignment mask JSON file (none: no anchors).")
    _add_labels(p)
    p.add_argument("--lambda", dest="lam", type=_unit_interval, default=0.5, help="Weight of the CE term.")
    p.add_argument("--epsilon", type=_positive, default=1e-8, help="Mask smoothing constant.")
    _add_out(p)
    p.set_defaults(func=cmd_loss)

    p = subs.add_parser("grad-check", help="Check analytic gradients by finite differences.", formatter_class=fmt)
    p.add_argument("--cases", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=_positive, default=1e-5, help="Largest acceptable relative error.")
    _add_out(p, help="Write per-case results as CSV.")
    p.set_defaults(func=cmd_grad_check)

    p = subs.add_parser("decode", help="Greedy and Viterbi decoding of emissions.", formatter_class=fmt)
    p.add_argument("--emissions", required=True, help="Emission matrix JSON file.")
    _add_labels(p, required=False)
    _add_out(p)
    p.set_defaults(func=cmd_decode)

    p = subs.add_parser("eval", help="Score hypotheses against references.", formatter_class=fmt)
    p.add_argument("--ref", required=True, help="Reference JSON-lines file.")
    p.add_argument("--hyp", required=True, help="Hypothesis JSON-lines file.")
    p.add_argument("--frame-ms", type=_positive, default=10.0, help="Frame duration in milliseconds.")
    p.add_argument("--jobs", type=_positive_int, default=1, help="Worker threads.")
    p.add_argument("--csv", help="Also write per-utterance scores as CSV.")
    _add_out(p)
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("gen-synth", help="Generate a synthetic dataset.", formatter_class=fmt)
    _add_synth(p)
    p.add_argument("--out", "-o", required=True, help="Dataset JSON file.")
    p.set_defaults(func=cmd_gen_synth, data=None)

    p = subs.add_parser("train-toy", help="Train the toy linear model.", formatter_class=fmt)
    p.add_argument("--data", help="Dataset JSON file.")
    _add_synth(p)
    p.add_argument("--objective", choices=("vanilla_ctc", "lcs_ctc", "ce_ctc"), default="lcs_ctc")
    p.add_argument("--epochs", type=_non_negative_int, default=30)
    p.add_argument("--lr", type=_non_negative, default=0.5, help="Learning rate.")
    p.add_argument("--lambda", dest="lam", type=_unit_interval, default=0.5)
    p.add_argument("--tol", type=_positive, default=1.0)
    p.add_argument("--cost-floor", type=_non_negative, default=0.05)
    p.add_argument("--epsilon", type=_positive, default=1e-8)
    p.add_argument("--mask-refresh", choices=("static", "epoch"), default="static")
    p.add_argument("--out", "-o", required=True, help="Model JSON file.")
    p.set_defaults(func=cmd_train_toy)

    p = subs.add_parser("eval-toy", help="Evaluate a toy model on held-out data.", formatter_class=fmt)
    p.add_argument("--model", required=True, help="Model JSON file.")
    p.add_argument("--data", help="Dataset JSON file.")
    _add_synth(p)
    p.add_argument("--frame-ms", type=_positive, default=1.0)
    _add_out(p)
    p.set_defaults(func=cmd_eval_toy)

    p = subs.add_parser("tol-sweep", help="Constrained ratio and precision versus tol, as CSV.", formatter_class=fmt)
    p.add_argument("--data", help="Dataset JSON file.")
    _add_synth(p)
    p.add_argument("--from", dest="tol_from", type=_positive, default=0.9)
    p.add_argument("--to", dest="tol_to", type=_positive, default=1.3)
    p.add_argument("--step", type=_positive, default=0.1)
    p.add_argument("--cost-floor", type=_non_negative, default=0.05)
    p.add_argument("--plot", help="Also write a plot of the sweep to this image file.")
    _add_out(p)
    p.set_defaults(func=cmd_tol_sweep)

    p = subs.add_parser("emissions-dump", help="Per-frame probabilities as CSV.", formatter_class=fmt)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--emissions", help="Emission matrix JSON file.")
    src.add_argument("--model", help="Model JSON file (needs --data).")
    p.add_argument("--data", help="Dataset JSON file.")
    p.add_argument("--utt", type=_non_negative_int, default=0, help="Utterance index in the dataset.")
    p.add_argument("--plot", help="Also write a plot of the emissions to this image file.")
    _add_out(p)
    p.set_defaults(func=cmd_emissions_dump)

    return parser


def run_config(args):
    """Collect the parsed arguments into a RunConfig."""
    opts = vars(args)
    return RunConfig(
        subcommand=args.subcommand,
        inputs={k: opts[k] for k in INPUT_FLAGS if opts.get(k) is not None},
        output=opts.get("out"),
        params={k: opts[k] for k in PARAM_FLAGS if opts.get(k) is not None},
    )


###############################################################################
# Helpers.
###############################################################################


def _inventory(args):
    if args.phoneme_table:
        return load_inventory(args.phoneme_table)
    return default_inventory()


def _labels(args, inventory, default=None):
    if args.labels is not None:
        return inventory.parse_labels(args.labels)
    if args.labels_file is not None:
        with io.open(args.labels_file, "r", encoding="utf-8") as f:
            return inventory.parse_labels(f.read())
    if default is None:
        raise UsageError("one of the arguments --labels --labels-file is required")
    return list(default)


def _jsonable(obj):
    """Replace NaN/inf with None and numpy scalars with Python ones."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def _emit_json(obj, out):
    text = json.dumps(_jsonable(obj), indent=1)
    if out:
        with io.open(out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        logger.info("Wrote %s", out)
    else:
        sys.stdout.write(text + "\n")


def _emit_dataframe(df, out):
    if out:
        df.to_csv(out, index=False)
        logger.info("Wrote %s", out)
    else:
        df.to_csv(sys.stdout, index=False)


def _dataset(args, inventory):
    if args.data:
        return read_dataset(args.data)
    subset = inventory.parse_labels(args.subset) if args.subset else None
    return gen_synthetic(
        num_utts=args.num_utts,
        vocab_subset=subset,
        mean_span_frames=args.mean_span_frames,
        feature_noise=args.feature_noise,
        dysfluency_rate=args.dysfluency_rate,
        rng_seed=args.seed,
        cost_noise=args.cost_noise,
        sim=inventory.similarity_table(),
    )


def _read_jsonl(path):
    """Read {"id", "phonemes", optional "spans"} records keyed by id."""
    records = {}
    with io.open(path, "r", encoding="utf-8") as f:
        for line_num, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                key = rec["id"]
                phonemes = list(rec["phonemes"])
            except (ValueError, KeyError, TypeError) as e:
                raise ParseError("{path}:{line_num}: bad record: {e}".format(**locals()))
            spans = rec.get("spans")
            seg = Segmentation.from_json({"spans": spans}) if spans is not None else None
            records[key] = (phonemes, seg)
    return records


###############################################################################
# Subcommands.
###############################################################################


def cmd_target(args):
    inventory = _inventory(args)
    seg = read_segmentation(args.segmentation)
    labels = _labels(args, inventory, default=seg.phonemes())
    builder = TargetCostBuilder(
        edge_sigma=args.edge_sigma, attenuate=not args.no_attenuate, normalize=args.normalize
    )
    cost = builder.build(seg, labels, inventory.similarity_table(), num_frames=args.num_frames)
    if args.out:
        write_matrix(cost, args.out)
    else:
        _emit_json(cost.to_json(), None)


def cmd_align(args):
    inventory = _inventory(args)
    cost = read_matrix(args.cost, kind="cost")
    labels = _labels(args, inventory, default=inventory.parse_labels(cost.row_labels))
    aligner = Aligner(sim=inventory.similarity_table(), tol=args.tol, cost_floor=args.cost_floor)
    mask = aligner.align(cost, labels)
    if args.vocab_mask:
        mask = expand_mask(mask, inventory.vocab)
    logger.info("Anchored %d of %d frames", int(mask.data.any(axis=0).sum()), mask.num_frames)
    if args.out:
        write_matrix(mask, args.out)
    else:
        _emit_json(mask.to_json(), None)


def cmd_loss(args):
    inventory = _inventory(args)
    emissions = read_matrix(args.emissions, kind="emission")
    target = _labels(args, inventory)
    if args.mask:
        mask = read_matrix(args.mask, kind="mask")
        if mask.row_labels != emissions.vocab:
            mask = expand_mask(mask, emissions.vocab)
    else:
        mask = np.zeros(emissions.shape, dtype=int)
    objective = LcsCtcObjective(lam=args.lam, epsilon=args.epsilon)
    breakdown, _ = objective(emissions, mask, target)
    _emit_json(breakdown.to_dict(), args.out)


def cmd_grad_check(args):
    df = check_gradients(num_cases=args.cases, seed=args.seed)
    if args.out:
        _emit_dataframe(df, args.out)
    worst = float(df["rel_error"].max())
    _emit_json({"cases": len(df), "max_rel_error": worst, "threshold": args.threshold}, None)
    if not worst <= args.threshold:
        raise LcsCtcError(
            "Largest relative gradient error {worst:.3g} exceeds {t:.3g}.".format(worst=worst, t=args.threshold)
        )


def cmd_decode(args):
    inventory = _inventory(args)
    emissions = read_matrix(args.emissions, kind="emission")
    result = {"greedy": greedy_decode(emissions)}
    if args.labels is not None or args.labels_file is not None:
        result["viterbi"] = viterbi_align(emissions, _labels(args, inventory)).to_json()
    _emit_json(result, args.out)


def _spans(seg, inventory):
    """Normalize span labels the way phoneme strings are."""
    if seg is None:
        return None
    labels = inventory.parse_labels([span.phoneme for span in seg])
    return Segmentation((label, span.onset, span.offset) for label, span in zip(labels, seg))


def cmd_eval(args):
    inventory = _inventory(args)
    refs = _read_jsonl(args.ref)
    hyps = _read_jsonl(args.hyp)
    items = []
    for key, (ref, ref_seg) in refs.items():
        if key not in hyps:
            raise ParseError("No hypothesis for utterance '{key}'.".format(**locals()))
        hyp, hyp_seg = hyps[key]
        items.append(
            EvalItem(
                key,
                inventory.parse_labels(ref),
                inventory.parse_labels(hyp),
                _spans(ref_seg, inventory),
                _spans(hyp_seg, inventory),
            )
        )
    scores, summary = corpus_report(items, inventory.similarity_table(), args.frame_ms, args.jobs)
    if args.csv:
        _emit_dataframe(scores_to_dataframe(scores), args.csv)
    _emit_json({"utterances": [s._asdict() for s in scores], "corpus": summary}, args.out)


def cmd_gen_synth(args):
    write_dataset(_dataset(args, _inventory(args)), args.out)


def cmd_train_toy(args):
    inventory = _inventory(args)
    dataset = _dataset(args, inventory)
    trainer = ToyTrainer(
        sim=inventory.similarity_table(),
        objective=args.objective,
        epochs=args.epochs,
        learning_rate=args.lr,
        lam=args.lam,
        tol=args.tol,
        cost_floor=args.cost_floor,
        epsilon=args.epsilon,
        mask_refresh=args.mask_refresh,
    )
    model, log = trainer.train(dataset)
    write_model(model, args.out, objective=args.objective, settings=trainer.settings(), log=log)


def cmd_eval_toy(args):
    inventory = _inventory(args)
    model, _ = read_model(args.model)
    dataset = _dataset(args, inventory)
    result = evaluate(model, dataset, inventory.similarity_table(), args.frame_ms)
    result["peakiness"] = result["peakiness"]._asdict()
    _emit_json(result, args.out)


def cmd_tol_sweep(args):
    inventory = _inventory(args)
    if args.tol_to < args.tol_from:
        raise UsageError("argument --to: must be >= --from")
    dataset = _dataset(args, inventory)
    num_steps = int(math.floor((args.tol_to - args.tol_from) / args.step + 1e-9))
    tols = [round(args.tol_from + k * args.step, 10) for k in range(num_steps + 1)]
    df = tol_sweep(
        [(u.cost, u.segmentation) for u in dataset],
        tols,
        inventory.similarity_table(),
        args.cost_floor,
    )
    _emit_dataframe(df, args.out)
    if args.plot:
        fig, axes = plt.subplots(figsize=(5, 3.5))
        axes.plot(df["tol"], df["constrained_ratio"], "o-", label="constrained ratio")
        axes.plot(df["tol"], df["precision"], "s-", label="precision")
        axes.set_xlabel("tol")
        axes.legend(loc="best")
        fig.savefig(args.plot, bbox_inches="tight")
        plt.close(fig)
        logger.info("Wrote %s", args.plot)


def cmd_emissions_dump(args):
    seg = None
    if args.emissions:
        emissions = read_matrix(args.emissions, kind="emission")
    else:
        if not args.data:
            raise UsageError("argument --model: needs --data")
        model, _ = read_model(args.model)
        dataset = read_dataset(args.data)
        if args.utt >= len(dataset):
            raise UsageError("argument --utt: the dataset has only {n} utterances".format(n=len(dataset)))
        utt = dataset[args.utt]
        emissions = model.emissions(utt.features)
        seg = utt.segmentation
    _emit_dataframe(emissions.to_dataframe().reset_index(), args.out)
    if args.plot:
        fig, _ = plot_emissions(emissions, seg)
        fig.savefig(args.plot, bbox_inches="tight")
        plt.close(fig)
        logger.info("Wrote %s", args.plot)


def main(argv=None):
    """
    Run the lcsctc command.

    Args:
        argv: Argument list (default: sys.argv[1:]).

    Returns:
        Exit status: 0 success, 1 usage error, 2 data error.
    """
    parser = get_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write("lcsctc: error: {e}\n".format(e=e))
        return 1
    except SystemExit as e:
        # --help
        return e.code or 0

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logger.debug("%s", run_config(args))

    try:
        args.func(args)
    except UsageError as e:
        sys.stderr.write("lcsctc: error: {e}\n".format(e=e))
        return 1
    except (LcsCtcError, OSError, json.JSONDecodeError) as e:
        sys.stderr.write("lcsctc: {e}\n".format(e=e))
        return 2
    return 0
