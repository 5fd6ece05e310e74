# -*- coding: utf-8 -*-
#
# npca documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys

sys.path.insert(0, os.path.abspath('..'))
import npca

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.ifconfig',
    'sphinx.ext.viewcode',
    'sphinx.ext.coverage',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'npca'
copyright = u'The npca developers'
author = u'The npca developers'

# The short X.Y version.
version = '.'.join(npca.__version__.split('.')[:2])
# The full version, including alpha/beta/rc tags.
release = npca.__version__

language = 'en'
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = 'alabaster'
html_static_path = ['_static']
htmlhelp_basename = 'npcadoc'

# -- Options for LaTeX output ---------------------------------------------

latex_documents = [
    (master_doc, 'npca.tex', u'npca Documentation',
     author, 'manual'),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'npca', u'npca Documentation',
     [author], 1)
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    (master_doc, 'npca', u'npca Documentation',
     author, 'npca', 'Wi-Fi Non-Primary Channel Access performance models.',
     'Miscellaneous'),
]
