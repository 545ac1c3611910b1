# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
Phoneme segmentations: ordered, non-overlapping spans of frames.
"""

import io
import json
from collections import namedtuple
from copy import copy

import pandas as pd
from tabulate import tabulate

from .errors import DomainError, ParseError

__all__ = ["Span", "Segmentation", "read_segmentation", "write_segmentation"]


# A span is a phoneme occupying frames onset..offset-1.
Span = namedtuple("Span", "phoneme onset offset")


class Segmentation(list):
    """
    Segmentation objects are lists of Spans arranged in order of ascending
    onset. Frames not covered by any span are silence.
    """

    def __init__(self, *args):
        super().__init__(Span(*s) for s in (args[0] if args else []))

    @classmethod
    def from_frame_labels(cls, labels, silence=None):
        """
        Build a segmentation from a list holding one phoneme label per frame.

        Args:
            labels: Phoneme label for each frame.
            silence: Label (or container of labels) marking frames that
                belong to no span. None is always treated as silence.

        Returns:
            Segmentation with consecutive repeats of a label merged into one span.
        """
        if silence is None or isinstance(silence, str):
            silence = {silence}
        silence = set(silence) | {None}

        seg = cls()
        onset = 0
        for t in range(1, len(labels) + 1):
            # Close the run when the label changes or the frames run out.
            if t < len(labels) and labels[t] == labels[onset]:
                continue
            if labels[onset] not in silence:
                seg.append(Span(labels[onset], onset, t))
            onset = t
        return seg

    @property
    def num_frames(self):
        """Frame just past the end of the last span (0 if empty)."""
        return self[-1].offset if self else 0

    def phonemes(self):
        """Return the sequence of span phonemes."""
        return [span.phoneme for span in self]

    def frame_labels(self, num_frames=None, fill=None):
        """
        Return a list with the phoneme of every frame.

        Args:
            num_frames: Number of frames to cover. Defaults to num_frames.
            fill: Label given to frames outside every span.
        """
        if num_frames is None:
            num_frames = self.num_frames
        labels = [fill] * num_frames
        for phoneme, onset, offset in self:
            for t in range(onset, min(offset, num_frames)):
                labels[t] = phoneme
        return labels

    def get_phoneme(self, frame):
        """Return the phoneme at a frame or None if the frame is silence."""
        for span in self:
            if span.onset <= frame < span.offset:
                return span.phoneme
        return None

    def delay(self, frames):
        """Return the segmentation shifted later in time by some frames."""
        delayed = copy(self)
        delayed.clear()
        delayed.extend(Span(p, on + frames, off + frames) for p, on, off in self)
        return delayed

    def merge_repeats(self):
        """Return segmentation with abutting spans of the same phoneme merged."""
        seg = copy(self)
        seg.clear()
        for span in self:
            if seg and seg[-1].phoneme == span.phoneme and seg[-1].offset == span.onset:
                seg[-1] = seg[-1]._replace(offset=span.offset)
            else:
                seg.append(span)
        return seg

    def validate(self, num_frames=None):
        """
        Check the spans are ordered, non-overlapping and non-empty.

        Args:
            num_frames: If given, spans must also lie within [0, num_frames).

        Raises:
            DomainError: On the first span that breaks a rule.
        """
        prev_offset = 0
        for i, (phoneme, onset, offset) in enumerate(self):
            if onset < 0:
                raise DomainError("Span {i} ({phoneme}) starts before frame 0.".format(**locals()))
            if onset >= offset:
                raise DomainError(
                    "Span {i} ({phoneme}) has onset {onset} >= offset {offset}.".format(**locals())
                )
            if onset < prev_offset:
                raise DomainError(
                    "Span {i} ({phoneme}) overlaps or precedes the previous span.".format(**locals())
                )
            if num_frames is not None and offset > num_frames:
                raise DomainError(
                    "Span {i} ({phoneme}) ends at {offset}, past the {num_frames} frames.".format(
                        **locals()
                    )
                )
            prev_offset = offset
        return self

    def to_json(self):
        return {
            "spans": [
                {"phoneme": p, "onset": int(on), "offset": int(off)} for p, on, off in self
            ]
        }

    @classmethod
    def from_json(cls, obj):
        try:
            spans = [(s["phoneme"], int(s["onset"]), int(s["offset"])) for s in obj["spans"]]
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError("Malformed segmentation JSON: {e}".format(e=e))
        return cls(spans)

    def to_dataframe(self, frame_ms=None):
        """
        Return a Pandas DataFrame with one row per span.

        Keywords Args:
            frame_ms: If given, add onset/offset columns in milliseconds.
        """
        df = pd.DataFrame(list(self), columns=Span._fields)
        if frame_ms is not None:
            df["onset_ms"] = df["onset"] * frame_ms
            df["offset_ms"] = df["offset"] * frame_ms
        return df

    def to_table(self, **kwargs):
        format = kwargs.get("format", "simple")
        return tabulate(tabular_data=list(self), headers=Span._fields, tablefmt=format)

    def to_text_table(self, **kwargs):
        if "format" not in kwargs:
            kwargs["format"] = "simple"
        print(self.to_table(**kwargs))


def read_segmentation(path):
    """Read a segmentation from a JSON file."""
    with io.open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except ValueError as e:
            raise ParseError("{path}: not valid JSON: {e}".format(path=path, e=e))
    return Segmentation.from_json(obj).validate()


def write_segmentation(seg, path):
    """Write a segmentation to a JSON file."""
    with io.open(path, "w", encoding="utf-8") as f:
        json.dump(seg.to_json(), f, indent=1)
