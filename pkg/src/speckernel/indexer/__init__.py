"""Lexical index over a C source tree.

No preprocessing and no type checking happens here. Files are tokenized,
top-level declarations are recognized structurally, and everything else
(macro expansion, handler analysis) works off that index.
"""

from ._lexer import BACKEND as TOKENIZER_BACKEND
from ._lexer import tokenize
from .database import (
    DEFAULT_INCLUDE_GLOBS,
    DEFAULT_SNIPPET_RADIUS,
    Definition,
    DefinitionDatabase,
    IndexError_,
    SourceCorpus,
    UsageReference,
    extract_code,
    find_usages,
    index_corpus,
    load_database,
    save_database,
)
from .handlers import (
    DEFAULT_TRIGGER_FIELDS,
    HandlerRegistration,
    find_operation_handlers,
    handlers_from_json,
    handlers_to_json,
)
from .scan import (
    KIND_ENUM,
    KIND_FUNCTION,
    KIND_GLOBALVAR,
    KIND_MACRO,
    KIND_STRUCT,
    KIND_UNION,
    RawDefinition,
    scan_text,
)

__all__ = [
    "TOKENIZER_BACKEND",
    "tokenize",
    "DEFAULT_INCLUDE_GLOBS",
    "DEFAULT_SNIPPET_RADIUS",
    "Definition",
    "DefinitionDatabase",
    "IndexError_",
    "SourceCorpus",
    "UsageReference",
    "extract_code",
    "find_usages",
    "index_corpus",
    "load_database",
    "save_database",
    "DEFAULT_TRIGGER_FIELDS",
    "HandlerRegistration",
    "find_operation_handlers",
    "handlers_from_json",
    "handlers_to_json",
    "KIND_ENUM",
    "KIND_FUNCTION",
    "KIND_GLOBALVAR",
    "KIND_MACRO",
    "KIND_STRUCT",
    "KIND_UNION",
    "RawDefinition",
    "scan_text",
]
