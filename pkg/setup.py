#!/usr/bin/env python
# -*- coding: utf-8 -*-

from os import sys

from setuptools import find_packages, setup

author = "lcsctc developers"
email = "lcsctc@users.noreply.github.com"
version = "0.1.0"

if "sdist" in sys.argv[1:]:
    with open("lcsctc/pckg_info.py", "w") as f:
        for name in ["version", "author", "email"]:
            f.write("{} = '{}'\n".format(name, locals()[name]))


with open("README.rst") as readme_file:
    readme = readme_file.read()

with open("HISTORY.rst") as history_file:
    history = history_file.read().replace(".. :changelog:", "")

requirements = [
    # Put package requirements here
    "numpy",
    "tabulate",
    "pandas",
    "matplotlib",
]

test_requirements = [
    # Put package test requirements here
    "pytest",
    "hypothesis",
]

setup(
    name="lcsctc",
    version=version,
    description="Partial LCS phoneme alignment and alignment-constrained CTC for phoneme recognition.",
    long_description=readme + "\n\n" + history,
    author=author,
    author_email=email,
    url="https://github.com/lcsctc/lcsctc",
    packages=find_packages(exclude=["tests"]),
    entry_points={"console_scripts": ["lcsctc = lcsctc.__main__:main"]},
    package_dir={"lcsctc": "lcsctc"},
    include_package_data=True,
    package_data={"lcsctc": ["data/*.tsv"]},
    scripts=[],
    install_requires=requirements,
    extras_require={"test": test_requirements},
    license="MIT",
    zip_safe=False,
    keywords="lcsctc ctc phoneme alignment speech recognition",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Natural Language :: English",
        "Programming Language :: Python :: 3 :: Only",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    test_suite="tests",
    tests_require=test_requirements,
)
