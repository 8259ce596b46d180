"""Literary corpus processing: clean, segment, and annotate novels into a
standard XML format, identify characters, and compute book- and corpus-level
analytics with static JSON/HTML/SVG reports."""

__version__ = "0.1.0"

from .config import Config
from .xml_model import AnnotatedBook, parse, serialize

__all__ = ["AnnotatedBook", "Config", "parse", "serialize", "__version__"]
