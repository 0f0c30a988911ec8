# Configuration file for the Sphinx documentation builder.
#
# This file only contains a selection of the most common options. For a full
# list see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------

project = 'sart'
copyright = '2026, sart developers'
author = 'sart developers'

# The full version, including alpha/beta/rc tags
release = '0.1.0'


# -- General configuration ---------------------------------------------------

extensions = [
    'myst_parser',
]
# mappings for parsing files
source_suffix = {'.rst': 'restructuredtext',
                 '.md': 'markdown'}

# myst: $...$ maths
myst_enable_extensions = ['dollarmath']

templates_path = ['_templates']
exclude_patterns = []


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = []
