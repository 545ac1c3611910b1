#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# lcsctc documentation build configuration file.

import os
import sys

# Get the project root dir, which is the parent dir of this
cwd = os.getcwd()
project_root = os.path.dirname(cwd)

# Insert the project root dir as the first element in the PYTHONPATH.
# This lets us ensure that the source package is imported, and that its
# version is used.
sys.path.insert(0, project_root)

import lcsctc

# -- General configuration ---------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.viewcode', 'sphinx.ext.napoleon']
templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'lcsctc'
copyright = u'2025, lcsctc developers.'

version = lcsctc.version
release = lcsctc.version

exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output -------------------------------------------

html_theme = 'default'
html_static_path = ['_static']
htmlhelp_basename = 'lcsctcdoc'

# -- Options for LaTeX output ------------------------------------------

latex_elements = {}
latex_documents = [
    ('index', 'lcsctc.tex',
     u'lcsctc Documentation',
     u'lcsctc developers', 'manual'),
]

# -- Options for manual page output ------------------------------------

man_pages = [
    ('index', 'lcsctc',
     u'lcsctc Documentation',
     [u'lcsctc developers'], 1)
]

# -- Options for Texinfo output ----------------------------------------

texinfo_documents = [
    ('index', 'lcsctc',
     u'lcsctc Documentation',
     u'lcsctc developers',
     'lcsctc',
     'Partial LCS alignment and alignment-constrained CTC.',
     'Miscellaneous'),
]
