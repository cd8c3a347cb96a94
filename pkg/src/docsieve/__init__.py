"""docsieve: induce an annotation schema from a text corpus, annotate it,
and answer structured queries over the result without any model on the
query path."""

__version__ = "0.1.0"

STORE_FORMAT_VERSION = 1
