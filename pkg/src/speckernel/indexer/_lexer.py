"""Tokenizer selection: compiled extension when built, pure Python otherwise."""

try:
    from speckernel.indexer import _ctokenizer as _impl

    BACKEND = "cython"
except ImportError:
    from speckernel.indexer import _tokenizer as _impl

    BACKEND = "python"

IDENT = _impl.IDENT
NUMBER = _impl.NUMBER
STRING = _impl.STRING
CHARLIT = _impl.CHARLIT
PUNCT = _impl.PUNCT
DIRECTIVE = _impl.DIRECTIVE
tokenize = _impl.tokenize
