#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
test_phonemes
----------------------------------

Tests for the phoneme inventory and similarity.
"""

import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcsctc.errors import DomainError, PhonemeTableError
from lcsctc.phonemes import (
    ARPABET,
    BLANK,
    DEFAULT_TABLE,
    FEATURE_ENUMS,
    FEATURES,
    load_inventory,
    normalize_symbol,
    parse_labels,
    profile_similarity,
    similarity,
    write_phoneme_table,
)


def table_lines():
    with io.open(DEFAULT_TABLE, encoding="utf-8") as f:
        return f.read().splitlines()


def write_table(tmp_path, lines):
    path = tmp_path / "phonemes.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def data_line_index(lines, symbol):
    for i, line in enumerate(lines):
        if line.split("\t")[0] == symbol:
            return i
    raise KeyError(symbol)


def test_default_inventory(inventory):
    assert len(inventory) == 39
    assert inventory.vocab_size == 40
    assert inventory.vocab[0] == BLANK
    assert inventory.id(BLANK) == 0
    assert sorted(inventory.vocab[1:]) == sorted(ARPABET)
    for p in inventory.phonemes:
        assert inventory.symbol(p.id) == p.symbol
        assert inventory.id(p.symbol) == p.id


def test_stress_digits_are_ignored(inventory):
    assert normalize_symbol("ih1") == "IH"
    assert normalize_symbol("ER0") == "ER"
    assert inventory.id("AH2") == inventory.id("AH")
    assert parse_labels("IH1 n S ER0 T") == ["IH", "N", "S", "ER", "T"]


def test_unknown_label():
    with pytest.raises(DomainError):
        parse_labels("IH XX")
    with pytest.raises(DomainError):
        parse_labels([BLANK])


def test_s_z_similarity():
    assert similarity("S", "Z") == 7 / 8
    assert similarity("Z", "S") == 7 / 8


def test_vowel_consonant_similarity_is_zero():
    for vowel in ("IH", "AA", "UW", "ER"):
        for consonant in ("N", "S", "T", "HH"):
            assert similarity(vowel, consonant) == 0.0


def test_blank_has_no_similarity():
    with pytest.raises(DomainError):
        similarity(BLANK, "IH")
    with pytest.raises(DomainError):
        similarity("IH", BLANK)


@given(st.sampled_from(ARPABET), st.sampled_from(ARPABET))
def test_similarity_symmetric_and_bounded(p, q):
    s = similarity(p, q)
    assert s == similarity(q, p)
    assert 0.0 <= s <= 1.0
    assert (s * 8) == int(s * 8)
    if p == q:
        assert s == 1.0


def test_single_feature_change_costs_one_eighth(inventory):
    for symbol in ("IH", "S"):
        profile = inventory.profile(symbol)
        for name in FEATURES[1:]:
            current = getattr(profile, name)
            other = next(v for v in FEATURE_ENUMS[name] if v != current)
            changed = profile._replace(**{name: other})
            assert profile_similarity(profile, changed) == 7 / 8


def test_similarity_table(sim, inventory):
    assert len(sim) == 40
    assert np.array_equal(sim.values, sim.values.T)
    assert np.all(np.diag(sim.values) == 1.0)
    assert np.all(sim.values[0, 1:] == 0.0)
    assert sim["S", "Z"] == 7 / 8
    assert sim["S"]["Z"] == 7 / 8
    assert sim[BLANK, BLANK] == 1.0
    with pytest.raises(ValueError):
        sim.values[1, 1] = 0.5


def test_similarity_table_exports(sim):
    df = sim.to_dataframe()
    assert df.shape == (40, 40)
    assert df.loc["S", "Z"] == 7 / 8
    text = sim.to_table("S Z", "IH")
    assert "0.875" in text
    assert "IH" in text


def test_round_trip_table(tmp_path, inventory):
    path = str(tmp_path / "copy.tsv")
    write_phoneme_table(inventory, path)
    copy = load_inventory(path)
    assert copy.vocab == inventory.vocab
    assert copy.profiles == inventory.profiles


def test_unknown_symbol_names_line(tmp_path):
    lines = table_lines()
    i = data_line_index(lines, "S")
    lines[i] = lines[i].replace("S", "QQ", 1)
    with pytest.raises(PhonemeTableError) as err:
        load_inventory(write_table(tmp_path, lines))
    assert err.value.line_num == i + 1
    assert "line {}".format(i + 1) in str(err.value)


def test_duplicate_symbol(tmp_path):
    lines = table_lines()
    lines.append(lines[data_line_index(lines, "S")])
    with pytest.raises(PhonemeTableError) as err:
        load_inventory(write_table(tmp_path, lines))
    assert err.value.line_num == len(lines)
    assert "duplicate" in str(err.value)


def test_missing_feature(tmp_path):
    lines = table_lines()
    i = data_line_index(lines, "Z")
    lines[i] = "\t".join(lines[i].split("\t")[:-1])
    with pytest.raises(PhonemeTableError) as err:
        load_inventory(write_table(tmp_path, lines))
    assert err.value.line_num == i + 1
    assert "voicing" in str(err.value)


def test_bad_feature_value(tmp_path):
    lines = table_lines()
    i = data_line_index(lines, "Z")
    lines[i] = lines[i].replace("voiced", "buzzy")
    with pytest.raises(PhonemeTableError) as err:
        load_inventory(write_table(tmp_path, lines))
    assert err.value.line_num == i + 1


def test_missing_phonemes(tmp_path):
    lines = table_lines()
    del lines[data_line_index(lines, "ZH")]
    with pytest.raises(PhonemeTableError) as err:
        load_inventory(write_table(tmp_path, lines))
    assert "ZH" in str(err.value)
