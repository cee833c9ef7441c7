"""Surface syntax, pretty printer and command line driver."""

from .parser import (
    AssumeDecl,
    DefDecl,
    Diagnostic,
    ParseError,
    SurfaceDecl,
    TypeDecl,
    decl_entry,
    parse,
    parse_sort,
    parse_term,
    tokenize,
)
from .pretty import format_source, pretty, pretty_decls, pretty_sort

__all__ = [
    "AssumeDecl",
    "DefDecl",
    "Diagnostic",
    "ParseError",
    "SurfaceDecl",
    "TypeDecl",
    "decl_entry",
    "format_source",
    "parse",
    "parse_sort",
    "parse_term",
    "pretty",
    "pretty_decls",
    "pretty_sort",
    "tokenize",
]
