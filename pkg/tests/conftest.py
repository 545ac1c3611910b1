# -*- coding: utf-8 -*-

import matplotlib

matplotlib.use("Agg")

import pytest

from lcsctc.phonemes import build_similarity_table, default_inventory


@pytest.fixture(scope="session")
def inventory():
    return default_inventory()


@pytest.fixture(scope="session")
def sim():
    return build_similarity_table()
