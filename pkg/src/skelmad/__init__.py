"""Call-by-need and skeletal call-by-need evaluation workbench."""

from .terms import ParseError, Term, TermStore, parse, to_text

__all__ = ["ParseError", "Term", "TermStore", "parse", "to_text"]
__version__ = "0.1.0"
