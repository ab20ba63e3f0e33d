# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------

project = "qubo-annealer"
copyright = "2026, ALEA Institute"
author = "ALEA Institute"
release = "0.1.0"
master_doc = "index"
language = "en"

# -- General configuration ---------------------------------------------------

extensions = [
    "myst_parser",
    "sphinxcontrib.mermaid",
]

myst_enable_extensions = ["dollarmath"]

templates_path = ["_templates"]
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_book_theme"
html_static_path = ["_static"]

html_theme_options = {
    "use_sidenotes": True,
    "collapse_navbar": True,
    "show_navbar_depth": 2,
    "path_to_docs": "docs",
    "home_page_in_toc": True,
}
