# -*- coding: utf-8 -*-
#
# Varcast documentation build configuration file.

import sys, os

# varcast is imported from the source tree for autodoc and the version.
sys.path.insert(0, os.path.abspath('..'))

import varcast

extensions = ['sphinx.ext.autodoc']
autoclass_content = 'both'

source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build']

project = u'Varcast'
copyright = u'2026, Thomas Sileo'
version = varcast.__version__
release = varcast.__version__

pygments_style = 'sphinx'
html_theme = 'alabaster'
html_show_sourcelink = False
htmlhelp_basename = 'Varcastdoc'
