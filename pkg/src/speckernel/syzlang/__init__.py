"""Syzlang subset: AST, parser, canonical printer, validator, constants."""

from .ast import (
    ArrayType,
    ConstType,
    Direction,
    ErrorCode,
    Field,
    FlagSet,
    FlagsType,
    IntType,
    LenType,
    NamedType,
    PtrType,
    ResourceDecl,
    SpecFile,
    StringType,
    StructDef,
    SyscallDesc,
    TypeExpr,
    ValidationError,
    link_resources,
    walk_type,
)
from .constants import (
    DEFAULT_BUILTIN_CONSTANTS,
    UnresolvedConstant,
    can_resolve,
    evaluate_expr,
    ioc_encode,
    resolve_constants,
    resolve_name,
)
from .parser import GENERIC_SYSCALLS, SyzlangSyntaxError, parse_spec, parse_type
from .printer import (
    DeclSpan,
    render_const_file,
    render_spec,
    render_spec_with_map,
    render_type,
)
from .validator import DEFAULT_BUILTIN_RESOURCES, validate_spec, validate_text

__all__ = [
    "ArrayType",
    "ConstType",
    "Direction",
    "ErrorCode",
    "Field",
    "FlagSet",
    "FlagsType",
    "IntType",
    "LenType",
    "NamedType",
    "PtrType",
    "ResourceDecl",
    "SpecFile",
    "StringType",
    "StructDef",
    "SyscallDesc",
    "TypeExpr",
    "ValidationError",
    "link_resources",
    "walk_type",
    "DEFAULT_BUILTIN_CONSTANTS",
    "UnresolvedConstant",
    "can_resolve",
    "evaluate_expr",
    "ioc_encode",
    "resolve_constants",
    "resolve_name",
    "GENERIC_SYSCALLS",
    "SyzlangSyntaxError",
    "parse_spec",
    "parse_type",
    "DeclSpan",
    "render_const_file",
    "render_spec",
    "render_spec_with_map",
    "render_type",
    "DEFAULT_BUILTIN_RESOURCES",
    "validate_spec",
    "validate_text",
]
