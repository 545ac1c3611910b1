# -*- coding: utf-8 -*-

# Copyright (c) 2025, lcsctc developers. The MIT License (MIT).

"""
CMU phoneme inventory, articulatory profiles and phoneme similarity.
"""

import functools
import io
import logging
import os
import re
from collections import OrderedDict, namedtuple
from enum import Enum

import numpy as np
import pandas as pd
from tabulate import tabulate

from .errors import DomainError, PhonemeTableError

__all__ = [
    "BLANK",
    "ARPABET",
    "FEATURES",
    "PhonemeType",
    "VowelLength",
    "Height",
    "Frontness",
    "Rounding",
    "Manner",
    "Place",
    "Voicing",
    "Phoneme",
    "ArticulatoryProfile",
    "Inventory",
    "SimilarityTable",
    "load_inventory",
    "default_inventory",
    "write_phoneme_table",
    "similarity",
    "build_similarity_table",
    "normalize_symbol",
    "parse_labels",
]

logger = logging.getLogger(__name__)

# Symbol used for the CTC blank. It always gets vocabulary id 0.
BLANK = "<blank>"

# The 39 stress-less CMU/ARPAbet phonemes.
ARPABET = (
    "AA AE AH AO AW AY B CH D DH EH ER EY F G HH IH IY JH K "
    "L M N NG OW OY P R S SH T TH UH UW V W Y Z ZH"
).split()

DEFAULT_TABLE = os.path.join(os.path.dirname(__file__), "data", "cmu_phonemes.tsv")

NA = "NA"


class PhonemeType(Enum):
    VOWEL = "vowel"
    CONSONANT = "consonant"


class VowelLength(Enum):
    SHORT = "short"
    LONG = "long"
    DIPHTHONG = "diphthong"
    NA = NA


class Height(Enum):
    HIGH = "high"
    MID = "mid"
    LOW = "low"
    NA = NA


class Frontness(Enum):
    FRONT = "front"
    CENTRAL = "central"
    BACK = "back"
    NA = NA


class Rounding(Enum):
    ROUNDED = "rounded"
    UNROUNDED = "unrounded"
    NA = NA


class Manner(Enum):
    STOP = "stop"
    FRICATIVE = "fricative"
    AFFRICATE = "affricate"
    NASAL = "nasal"
    LIQUID = "liquid"
    GLIDE = "glide"
    NA = NA


class Place(Enum):
    BILABIAL = "bilabial"
    LABIODENTAL = "labiodental"
    DENTAL = "dental"
    ALVEOLAR = "alveolar"
    POSTALVEOLAR = "postalveolar"
    PALATAL = "palatal"
    VELAR = "velar"
    GLOTTAL = "glottal"
    NA = NA


class Voicing(Enum):
    VOICED = "voiced"
    VOICELESS = "voiceless"
    NA = NA


# The eight articulatory features, in phoneme-table column order.
FEATURES = (
    "phoneme_type",
    "vowel_length",
    "height",
    "frontness",
    "rounding",
    "manner",
    "place",
    "voicing",
)
FEATURE_ENUMS = OrderedDict(
    zip(
        FEATURES,
        (PhonemeType, VowelLength, Height, Frontness, Rounding, Manner, Place, Voicing),
    )
)
VOWEL_FEATURES = ("vowel_length", "height", "frontness", "rounding")
CONSONANT_FEATURES = ("manner", "place", "voicing")

# A phoneme is its ARPAbet symbol and its vocabulary id.
Phoneme = namedtuple("Phoneme", "symbol id")

ArticulatoryProfile = namedtuple("ArticulatoryProfile", FEATURES)


def normalize_symbol(symbol):
    """Return an ARPAbet symbol in upper case with any stress digits removed."""
    if symbol == BLANK:
        return symbol
    return re.sub(r"\d+$", "", symbol.strip().upper())


def profile_problems(profile):
    """Return a list of ways a profile breaks the vowel/consonant n/a rules."""
    if profile.phoneme_type is PhonemeType.VOWEL:
        must_be_na, must_have = CONSONANT_FEATURES, VOWEL_FEATURES
    else:
        must_be_na, must_have = VOWEL_FEATURES, CONSONANT_FEATURES
    problems = []
    for name in must_be_na:
        if getattr(profile, name).value != NA:
            problems.append("{name} must be NA for a {t}".format(name=name, t=profile.phoneme_type.value))
    for name in must_have:
        if getattr(profile, name).value == NA:
            problems.append("{name} can't be NA for a {t}".format(name=name, t=profile.phoneme_type.value))
    return problems


def profile_similarity(a, b):
    """
    Fraction of the eight features on which two profiles agree.

    A feature that is n/a in both profiles only counts as agreement when
    the two phonemes are of the same type.
    """
    same_type = a.phoneme_type == b.phoneme_type
    agree = 0
    for fa, fb in zip(a, b):
        if fa != fb:
            continue
        if fa.value == NA and not same_type:
            continue
        agree += 1
    return agree / len(FEATURES)


class Inventory(object):
    """
    A phoneme inventory: the phonemes, their articulatory profiles and the
    vocabulary (blank + phonemes) used by emission matrices.

    The blank always has id 0 and the phonemes get ids 1..N in the order
    they were listed. Inventories are immutable once built.
    """

    def __init__(self, profiles):
        """
        Args:
            profiles: Ordered mapping of ARPAbet symbol -> ArticulatoryProfile.
        """
        self.blank = Phoneme(BLANK, 0)
        self.phonemes = tuple(Phoneme(sym, i) for i, sym in enumerate(profiles, 1))
        self.profiles = OrderedDict(profiles)
        self._ids = {p.symbol: p.id for p in self.phonemes}
        self._ids[BLANK] = 0
        self._table = None

    def __len__(self):
        return len(self.phonemes)

    def __contains__(self, symbol):
        return symbol in self._ids

    def __repr__(self):
        return "Inventory({n} phonemes + blank)".format(n=len(self))

    @property
    def vocab(self):
        """List of vocabulary symbols ordered by id (blank first)."""
        return [BLANK] + [p.symbol for p in self.phonemes]

    @property
    def vocab_size(self):
        return len(self.phonemes) + 1

    def id(self, symbol):
        """Return the vocabulary id of a symbol (stress digits are ignored)."""
        try:
            return self._ids[normalize_symbol(symbol)]
        except KeyError:
            raise DomainError("Unknown phoneme '{symbol}'.".format(symbol=symbol))

    def symbol(self, id):
        """Return the symbol having the given vocabulary id."""
        if id == 0:
            return BLANK
        return self.phonemes[id - 1].symbol

    def phoneme(self, symbol):
        """Return the Phoneme for a symbol."""
        id = self.id(symbol)
        return self.blank if id == 0 else self.phonemes[id - 1]

    def profile(self, p):
        """Return the articulatory profile of a phoneme or symbol."""
        symbol = p.symbol if isinstance(p, Phoneme) else normalize_symbol(p)
        if symbol == BLANK:
            raise DomainError("The blank has no articulatory profile.")
        try:
            return self.profiles[symbol]
        except KeyError:
            raise DomainError("Unknown phoneme '{symbol}'.".format(symbol=p))

    def similarity(self, p, q):
        """Similarity in [0,1] of two phonemes (Phoneme objects or symbols)."""
        return profile_similarity(self.profile(p), self.profile(q))

    def similarity_table(self):
        """Return the (cached) similarity table for this inventory."""
        if self._table is None:
            self._table = SimilarityTable.from_inventory(self)
        return self._table

    def parse_labels(self, labels):
        """
        Convert a label sequence into a list of normalized phoneme symbols.

        Args:
            labels: A string of space-separated ARPAbet symbols or an
                iterable of symbols. Stress digits are stripped.

        Returns:
            List of symbols, all in this inventory (blank excluded).
        """
        if isinstance(labels, str):
            labels = labels.split()
        symbols = []
        for label in labels:
            sym = normalize_symbol(label)
            if sym == BLANK or sym not in self._ids:
                raise DomainError("Unknown phoneme label '{label}'.".format(label=label))
            symbols.append(sym)
        return symbols


class SimilarityTable(object):
    """
    V x V matrix of phoneme similarities indexed by vocabulary id.

    The blank row and column are zero except for the diagonal entry, so the
    table is symmetric with a unit diagonal over the whole vocabulary.
    """

    def __init__(self, symbols, values):
        self.symbols = list(symbols)
        self.values = np.array(values, dtype=float)
        self.values.setflags(write=False)
        self._index = {sym: i for i, sym in enumerate(self.symbols)}

    @classmethod
    def from_inventory(cls, inventory):
        vocab = inventory.vocab
        values = np.eye(len(vocab))
        for p in inventory.phonemes:
            for q in inventory.phonemes:
                if q.id > p.id:
                    continue
                s = profile_similarity(inventory.profiles[p.symbol], inventory.profiles[q.symbol])
                values[p.id, q.id] = values[q.id, p.id] = s
        return cls(vocab, values)

    def index(self, symbol):
        try:
            return self._index[normalize_symbol(symbol)]
        except KeyError:
            raise DomainError("Unknown phoneme '{symbol}'.".format(symbol=symbol))

    def indices(self, symbols):
        """Return an integer array of table indices for a list of symbols."""
        return np.array([self.index(s) for s in symbols], dtype=int)

    def __getitem__(self, key):
        """
        table[p, q] returns s(p,q); table[p] returns a dict of s(p,·) by symbol.
        """
        if isinstance(key, tuple):
            p, q = key
            return float(self.values[self.index(p), self.index(q)])
        row = self.values[self.index(key)]
        return {sym: float(v) for sym, v in zip(self.symbols, row)}

    def __len__(self):
        return len(self.symbols)

    def to_dataframe(self):
        """Return the table as a Pandas DataFrame labeled by symbol."""
        return pd.DataFrame(self.values, index=self.symbols, columns=self.symbols)

    def to_table(self, *symbols, **kwargs):
        """
        Return a text table of similarities.

        Args:
            *symbols: Phonemes to include. A string may contain multiple,
                space-separated symbols. Defaults to the whole vocabulary.

        Keywords Args:
            format: tabulate table format (default "simple").
        """
        format = kwargs.pop("format", "simple")
        if symbols:
            symbols = [normalize_symbol(s) for sym in symbols for s in sym.split()]
        else:
            symbols = self.symbols
        idx = self.indices(symbols)
        rows = [[sym] + list(self.values[i, idx]) for sym, i in zip(symbols, idx)]
        return tabulate(rows, headers=[""] + list(symbols), tablefmt=format, floatfmt=".3f")


def _read_table_lines(lines):
    """Parse phoneme-table lines into an ordered symbol -> profile mapping."""

    profiles = OrderedDict()
    for line_num, line in enumerate(lines, 1):
        # Remove comments and skip lines with nothing left on them.
        line = line.split("#", 1)[0].rstrip("\r\n")
        if not line.strip():
            continue

        fields = [f.strip() for f in line.split("\t")]
        fields = [f for f in fields if f]
        symbol = normalize_symbol(fields[0])
        if symbol not in ARPABET:
            raise PhonemeTableError("unknown phoneme symbol '{f}'".format(f=fields[0]), line_num)
        if symbol in profiles:
            raise PhonemeTableError("duplicate phoneme symbol '{symbol}'".format(**locals()), line_num)

        values = fields[1:]
        if len(values) < len(FEATURES):
            missing = ", ".join(FEATURES[len(values):])
            raise PhonemeTableError(
                "phoneme '{symbol}' is missing feature(s): {missing}".format(**locals()), line_num
            )
        if len(values) > len(FEATURES):
            raise PhonemeTableError(
                "phoneme '{symbol}' has {n} features, expected {m}".format(
                    symbol=symbol, n=len(values), m=len(FEATURES)
                ),
                line_num,
            )

        features = []
        for (name, enum_cls), token in zip(FEATURE_ENUMS.items(), values):
            token = token if token.upper() == NA else token.lower()
            token = NA if token.upper() == NA else token
            try:
                features.append(enum_cls(token))
            except ValueError:
                raise PhonemeTableError(
                    "bad value '{token}' for feature {name} of '{symbol}'".format(**locals()),
                    line_num,
                )
        profile = ArticulatoryProfile(*features)
        problems = profile_problems(profile)
        if problems:
            raise PhonemeTableError(
                "phoneme '{symbol}': {p}".format(symbol=symbol, p="; ".join(problems)), line_num
            )
        profiles[symbol] = profile

    missing = [sym for sym in ARPABET if sym not in profiles]
    if missing:
        raise PhonemeTableError(
            "table is missing phoneme(s): {m}".format(m=" ".join(missing))
        )
    return profiles


def load_inventory(source=None):
    """
    Load a phoneme inventory from a phoneme-table file.

    Args:
        source: Path of a phoneme-table file, an open text file, or None to
            use the table shipped with the package.

    Returns:
        An Inventory with the 39 phonemes plus the blank.

    Raises:
        PhonemeTableError: Unknown or duplicate symbol, bad or missing
            feature, or an incomplete table. The message names the line.
    """
    if source is None:
        source = DEFAULT_TABLE
    if hasattr(source, "read"):
        profiles = _read_table_lines(source.read().splitlines())
    else:
        with io.open(source, "r", encoding="utf-8") as f:
            profiles = _read_table_lines(f.read().splitlines())
    logger.debug("Loaded %d phoneme profiles from %s", len(profiles), getattr(source, "name", source))
    return Inventory(profiles)


@functools.lru_cache(maxsize=None)
def default_inventory():
    """Return the inventory built from the shipped phoneme table."""
    return load_inventory()


def write_phoneme_table(inventory, path):
    """Write an inventory to a phoneme-table file."""
    with io.open(path, "w", encoding="utf-8") as f:
        f.write("# symbol\t" + "\t".join(FEATURES) + "\n")
        for symbol, profile in inventory.profiles.items():
            f.write("\t".join([symbol] + [v.value for v in profile]) + "\n")


def similarity(p, q, inventory=None):
    """
    Phoneme similarity s(p,q) in [0,1].

    The fraction of the eight articulatory features on which p and q agree.
    A feature that is n/a for both counts only if both are the same type.

    Raises:
        DomainError: p or q is the blank or isn't in the inventory.
    """
    inventory = inventory or default_inventory()
    return inventory.similarity(p, q)


def build_similarity_table(inventory=None):
    """Materialize all pairwise similarities of an inventory's vocabulary."""
    inventory = inventory or default_inventory()
    return inventory.similarity_table()


def parse_labels(labels, inventory=None):
    """Normalize a label string or list using the (default) inventory."""
    inventory = inventory or default_inventory()
    return inventory.parse_labels(labels)
