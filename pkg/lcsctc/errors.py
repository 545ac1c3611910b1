# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
Exceptions raised by lcsctc.

Everything derives from LcsCtcError so callers (and the command-line tool)
can separate data problems from programming errors.
"""


class LcsCtcError(Exception):
    """Base error for the package."""


class ParseError(LcsCtcError, ValueError):
    """An input file or label string could not be parsed."""


class PhonemeTableError(ParseError):
    """A phoneme-table file is malformed. The message names the offending line."""

    def __init__(self, message, line_num=None):
        if line_num is not None:
            message = "line {line_num}: {message}".format(**locals())
        super().__init__(message)
        self.line_num = line_num


class MatrixFormatError(ParseError):
    """A matrix JSON file is malformed or its dimensions don't agree."""


class DomainError(LcsCtcError, ValueError):
    """An argument lies outside the domain of an operation."""


class InfeasibleTargetError(LcsCtcError):
    """A CTC target can't be emitted within the available number of frames."""


class TrainingDivergedError(LcsCtcError, FloatingPointError):
    """Training produced a non-finite loss."""


class UsageError(LcsCtcError):
    """Bad command-line usage."""
