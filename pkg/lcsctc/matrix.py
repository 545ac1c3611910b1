# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
Labeled frame matrices (costs, emissions, alignment masks) and their
JSON file format.
"""

import io
import json
import logging
import os
import tempfile

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from tabulate import tabulate

from .errors import DomainError, MatrixFormatError

__all__ = [
    "CostMatrix",
    "EmissionMatrix",
    "AlignmentMask",
    "read_matrix",
    "write_matrix",
    "read_cost_matrix",
    "write_cost_matrix",
]

logger = logging.getLogger(__name__)


class MatrixBase(object):
    """
    A matrix with one labeled row per phoneme (or vocabulary entry) and one
    column per frame.
    """

    kind = None  # Value of the "kind" field in matrix files.
    dtype = float

    # Default matplotlib settings.
    cmap = "viridis"
    title_fmt = {"fontweight": "bold"}

    def __new__(cls, *args, **kwargs):
        # Keep MatrixBase from being instantiated.
        if cls is MatrixBase:
            raise TypeError("MatrixBase class may not be instantiated")
        return object.__new__(cls)

    def __init__(self, row_labels, data):
        """
        Args:
            row_labels: Label for each row.
            data: Array-like of shape (len(row_labels), num_frames).
        """
        self.row_labels = list(row_labels)
        self.data = np.array(data, dtype=self.dtype)
        if self.data.ndim != 2:
            raise DomainError(
                "{kind} matrix must be 2-D, got shape {shape}.".format(
                    kind=self.kind, shape=self.data.shape
                )
            )
        if self.data.shape[0] != len(self.row_labels):
            raise DomainError(
                "{kind} matrix has {r} rows but {n} row labels.".format(
                    kind=self.kind, r=self.data.shape[0], n=len(self.row_labels)
                )
            )
        self.check()

    def check(self):
        """Raise DomainError if the data breaks the invariants of the matrix kind."""
        if self.num_rows < 1 or self.num_frames < 1:
            raise DomainError(
                "{kind} matrix needs at least one row and one frame.".format(kind=self.kind)
            )

    @property
    def num_rows(self):
        return self.data.shape[0]

    @property
    def num_frames(self):
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and self.row_labels == other.row_labels
            and self.data.shape == other.data.shape
            and bool(np.array_equal(self.data, other.data))
        )

    def __ne__(self, other):
        return not self == other

    def __repr__(self):
        return "{cls}({n} x {t})".format(
            cls=type(self).__name__, n=self.num_rows, t=self.num_frames
        )

    def copy(self, data=None):
        """Return a matrix with the same labels and a copy of the (or new) data."""
        return type(self)(self.row_labels, self.data.copy() if data is None else data)

    def row(self, label):
        """Return the data of the first row having the given label."""
        return self.data[self.row_labels.index(label)]

    def to_json(self):
        return {
            "kind": self.kind,
            "row_labels": list(self.row_labels),
            "num_frames": int(self.num_frames),
            "data": self.data.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        try:
            kind = obj["kind"]
            row_labels = obj["row_labels"]
            num_frames = obj["num_frames"]
            data = obj["data"]
        except (KeyError, TypeError) as e:
            raise MatrixFormatError("Matrix JSON is missing field {e}.".format(e=e))
        if cls.kind is not None and kind != cls.kind:
            raise MatrixFormatError(
                "Expected a {want} matrix but found '{kind}'.".format(want=cls.kind, kind=kind)
            )
        if not isinstance(row_labels, list):
            raise MatrixFormatError("Matrix row_labels must be a list.")
        if not isinstance(num_frames, int) or isinstance(num_frames, bool):
            raise MatrixFormatError("Matrix num_frames must be an integer.")
        if not isinstance(data, list) or len(data) != len(row_labels):
            raise MatrixFormatError(
                "Matrix declares {n} row labels but holds {r} rows.".format(
                    n=len(row_labels), r=len(data) if isinstance(data, list) else 0
                )
            )
        for i, row in enumerate(data):
            if not isinstance(row, list) or len(row) != num_frames:
                raise MatrixFormatError(
                    "Row {i} of the matrix doesn't have {num_frames} frames.".format(**locals())
                )
        try:
            return MATRIX_KINDS[kind](row_labels, data)
        except KeyError:
            raise MatrixFormatError("Unknown matrix kind '{kind}'.".format(kind=kind))
        except (DomainError, TypeError, ValueError) as e:
            raise MatrixFormatError(str(e))

    def to_dataframe(self):
        """Return a Pandas DataFrame with a column per row label and frame as the index."""
        return pd.DataFrame(
            self.data.T, columns=self.row_labels, index=pd.RangeIndex(self.num_frames, name="frame")
        )

    def to_table(self, **kwargs):
        """
        Return a text table with a row per label and a column per frame.

        Keywords Args:
            format: tabulate table format (default "simple").
            floatfmt: Number format for the cells (default ".3f").
        """
        format = kwargs.get("format", "simple")
        floatfmt = kwargs.get("floatfmt", ".3f")
        rows = [[lbl] + list(r) for lbl, r in zip(self.row_labels, self.data)]
        headers = [""] + [str(t) for t in range(self.num_frames)]
        return tabulate(tabular_data=rows, headers=headers, tablefmt=format, floatfmt=floatfmt)

    def to_text_table(self, **kwargs):
        print(self.to_table(**kwargs))

    def to_matplotlib(self, *labels, **kwargs):
        """
        Plot the matrix.

        Args:
            *labels: Row labels to draw as curves over the frames. A string
                may contain multiple, space-separated labels. With no labels
                the whole matrix is drawn as a heat map.

        Keywords Args:
            title: String placed across the top of the display.
            title_fmt (dict): https://matplotlib.org/3.2.1/api/text_api.html#matplotlib.text.Text
            caption: String placed along the frame axis.
            cmap: Colormap for the heat map.
            width: The width of the display in inches.
            height: The height of the display in inches.

        Returns:
            Figure and axes created by matplotlib.pyplot.subplots.
        """
        title = kwargs.pop("title", "")
        title_fmt = dict(self.title_fmt)
        title_fmt.update(kwargs.pop("title_fmt", {}))
        caption = kwargs.pop("caption", "frame")
        cmap = kwargs.pop("cmap", self.cmap)
        width = kwargs.pop("width", max(4.0, 0.15 * self.num_frames))
        height = kwargs.pop("height", max(3.0, 0.2 * self.num_rows))

        fig, axes = plt.subplots(figsize=(width, height))

        labels = [lbl for label in labels for lbl in label.split()]
        if labels:
            # One curve per requested row.
            for lbl in labels:
                axes.plot(range(self.num_frames), self.row(lbl), label=lbl)
            axes.legend(loc="upper right", fontsize="small")
        else:
            img = axes.imshow(self.data, aspect="auto", interpolation="nearest", cmap=cmap)
            axes.set_yticks(range(self.num_rows))
            axes.set_yticklabels(self.row_labels, fontsize="small")
            fig.colorbar(img, ax=axes)

        axes.set_xlabel(caption)
        axes.set_title(title, **title_fmt)
        return fig, axes


class CostMatrix(MatrixBase):
    """n x T matrix of finite, non-negative matching costs."""

    kind = "cost"

    def check(self):
        super().check()
        if not np.all(np.isfinite(self.data)):
            raise DomainError("Cost matrix values must be finite.")
        if np.any(self.data < 0):
            raise DomainError("Cost matrix values must be non-negative.")


class EmissionMatrix(MatrixBase):
    """
    V x T matrix of per-frame probabilities over the vocabulary. Row 0 is
    the blank. Every column sums to 1.
    """

    kind = "emission"
    blank = 0
    sum_tolerance = 1e-9

    def check(self):
        super().check()
        if not np.all(np.isfinite(self.data)) or np.any(self.data < 0):
            raise DomainError("Emission probabilities must be finite and non-negative.")
        sums = self.data.sum(axis=0)
        if np.any(np.abs(sums - 1.0) > self.sum_tolerance):
            t = int(np.argmax(np.abs(sums - 1.0)))
            raise DomainError(
                "Emission column {t} sums to {s}, not 1.".format(t=t, s=sums[t])
            )

    @classmethod
    def from_logits(cls, vocab, logits):
        """Build emissions from a V x T array of logits by a softmax over each column."""
        logits = np.asarray(logits, dtype=float)
        z = logits - logits.max(axis=0, keepdims=True)
        p = np.exp(z)
        return cls(vocab, p / p.sum(axis=0, keepdims=True))

    @property
    def vocab(self):
        return self.row_labels

    def log_probs(self, floor=0.0):
        """Natural log of the probabilities, clamped below at floor."""
        with np.errstate(divide="ignore"):
            return np.log(np.maximum(self.data, floor))

    def blank_fraction(self):
        """Fraction of frames whose most probable symbol is the blank."""
        return float(np.mean(np.argmax(self.data, axis=0) == self.blank))


class AlignmentMask(MatrixBase):
    """0/1 matrix marking the cells an alignment allows."""

    kind = "mask"
    dtype = int

    def check(self):
        super().check()
        if np.any((self.data != 0) & (self.data != 1)):
            raise DomainError("Alignment mask entries must be 0 or 1.")

    def anchored_frames(self):
        """Return the indices of frames with at least one marked cell."""
        return np.flatnonzero(self.data.any(axis=0))

    def cells(self):
        """Return the set of marked (row, frame) cells."""
        return set(zip(*(idx.tolist() for idx in np.nonzero(self.data))))


MATRIX_KINDS = {cls.kind: cls for cls in (CostMatrix, EmissionMatrix, AlignmentMask)}


def read_matrix(path, kind=None):
    """
    Read a matrix file.

    Args:
        path: File to read.
        kind: If given, the "kind" the file must declare.

    Returns:
        A CostMatrix, EmissionMatrix or AlignmentMask.

    Raises:
        MatrixFormatError: The file isn't a well-formed matrix of the kind.
    """
    with io.open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except ValueError as e:
            raise MatrixFormatError("{path}: not valid JSON: {e}".format(path=path, e=e))
    cls = MATRIX_KINDS[kind] if kind else MatrixBase
    return cls.from_json(obj)


def write_matrix(matrix, path):
    """
    Write a matrix file. Floats are stored in their shortest round-trip
    decimal form so reading the file back gives identical values. The file
    is written to a temporary name and then moved into place.
    """
    try:
        text = json.dumps(matrix.to_json(), allow_nan=False)
    except ValueError:
        raise MatrixFormatError("Can't write a matrix holding non-finite values.")
    dirname = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=dirname, prefix=".lcsctc-", suffix=".tmp")
    try:
        with io.open(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info("Wrote %s matrix (%d x %d) to %s", matrix.kind, matrix.num_rows, matrix.num_frames, path)


def read_cost_matrix(path):
    return read_matrix(path, kind="cost")


def write_cost_matrix(cost, path):
    write_matrix(cost, path)
