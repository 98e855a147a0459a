"""Semantic checks over a parsed SpecFile.

Eight error codes: UndefinedType, UnknownConstant, NonConstantArrayLength,
UnmatchedDependency, DuplicateSyscall, IllegalRange, CyclicType, and
SyntaxError (raised only through validate_text, since a parsed SpecFile
is past syntax). Errors are data, never exceptions.
"""

from __future__ import annotations

from speckernel.indexer.database import DefinitionDatabase

from . import constants as consts
from .ast import (
    ArrayType,
    ConstType,
    ErrorCode,
    Field,
    FlagsType,
    IntType,
    NamedType,
    PtrType,
    SpecFile,
    StructDef,
    ValidationError,
    link_resources,
    walk_type,
)
from .parser import SyzlangSyntaxError, parse_spec
from .printer import render_spec_with_map

# resources a generated spec may consume without producing them itself
DEFAULT_BUILTIN_RESOURCES = ("fd", "sock", "pid", "uid", "gid")


def validate_text(
    text: str,
    db: DefinitionDatabase,
    *,
    path: str = "",
    builtin_resources=DEFAULT_BUILTIN_RESOURCES,
    builtin_constants: dict | None = None,
) -> tuple[SpecFile | None, list[ValidationError]]:
    """Parse then validate; a parse failure becomes one SyntaxError entry."""
    try:
        spec = parse_spec(text)
    except SyzlangSyntaxError as e:
        err = ValidationError(
            code=ErrorCode.SYNTAX_ERROR,
            message=f"expected {e.expected}",
            target="",
            location=(path, e.line),
        )
        return None, [err]
    return spec, validate_spec(
        spec,
        db,
        path=path,
        builtin_resources=builtin_resources,
        builtin_constants=builtin_constants,
    )


def validate_spec(
    spec: SpecFile,
    db: DefinitionDatabase,
    *,
    path: str = "",
    builtin_resources=DEFAULT_BUILTIN_RESOURCES,
    builtin_constants: dict | None = None,
) -> list[ValidationError]:
    spec = link_resources(spec)
    _, spans = render_spec_with_map(spec)
    line_of: dict[tuple[str, str], int] = {}
    for s in spans:
        line_of.setdefault((s.kind, s.name), s.start_line)

    errors: list[ValidationError] = []

    def err(code: ErrorCode, message: str, target: str, kind: str):
        errors.append(
            ValidationError(
                code=code,
                message=message,
                target=target,
                location=(path, line_of.get((kind, target), 0)),
            )
        )

    known_types = spec.type_names()
    known_resources = spec.resource_names()
    known_flag_sets = {fs.name for fs in spec.flag_sets}
    builtin = set(builtin_resources)

    def check_type(t, target: str, kind: str, sibling_names: set):
        for node in walk_type(t):
            if isinstance(node, NamedType):
                name = node.name
                if (
                    name not in known_types
                    and name not in known_resources
                    and name not in builtin
                ):
                    err(
                        ErrorCode.UNDEFINED_TYPE,
                        f"type {name!r} is not defined in this spec",
                        target,
                        kind,
                    )
            elif isinstance(node, FlagsType):
                if node.set_name not in known_flag_sets:
                    err(
                        ErrorCode.UNDEFINED_TYPE,
                        f"flag set {node.set_name!r} is not defined in this spec",
                        target,
                        kind,
                    )
            elif isinstance(node, IntType):
                if node.range is not None and node.range[0] > node.range[1]:
                    err(
                        ErrorCode.ILLEGAL_RANGE,
                        f"range [{node.range[0]}:{node.range[1]}] has lo > hi",
                        target,
                        kind,
                    )
            elif isinstance(node, ArrayType):
                length = node.length
                if length is None or consts.is_int_literal(length):
                    continue
                if length in sibling_names:
                    err(
                        ErrorCode.NON_CONSTANT_ARRAY_LENGTH,
                        f"array length {length!r} names a sibling field, not a "
                        f"constant; use array[T] with {length} len[...] instead",
                        target,
                        kind,
                    )
                elif not consts.can_resolve(length, db, builtin_constants):
                    err(
                        ErrorCode.UNKNOWN_CONSTANT,
                        f"array length {length!r} is not a known constant",
                        target,
                        kind,
                    )
            elif isinstance(node, ConstType):
                v = node.value
                if not consts.is_int_literal(v) and not consts.can_resolve(
                    v, db, builtin_constants
                ):
                    err(
                        ErrorCode.UNKNOWN_CONSTANT,
                        f"constant {v!r} is not defined in the indexed code",
                        target,
                        kind,
                    )

    # flag set members must be resolvable
    for fs in spec.flag_sets:
        for v in fs.values:
            if not consts.is_int_literal(v) and not consts.can_resolve(
                v, db, builtin_constants
            ):
                err(
                    ErrorCode.UNKNOWN_CONSTANT,
                    f"flag value {v!r} is not defined in the indexed code",
                    fs.name,
                    "flags",
                )

    for t in spec.types:
        siblings = {f.name for f in t.fields}
        for f in t.fields:
            check_type(f.type, t.name, "type", siblings)

    seen_syscalls = set()
    for sc in spec.syscalls:
        name = sc.full_name
        if name in seen_syscalls:
            err(
                ErrorCode.DUPLICATE_SYSCALL,
                f"syscall {name!r} is declared more than once",
                name,
                "syscall",
            )
        seen_syscalls.add(name)
        siblings = {p for p, _t in sc.params}
        for _pname, ptype in sc.params:
            check_type(ptype, name, "syscall", siblings)
        if sc.ret is not None and sc.ret not in known_resources and sc.ret not in builtin:
            err(
                ErrorCode.UNDEFINED_TYPE,
                f"return resource {sc.ret!r} is not declared",
                name,
                "syscall",
            )

    for r in spec.resources:
        if r.consumed_by and not r.produced_by and r.name not in builtin:
            err(
                ErrorCode.UNMATCHED_DEPENDENCY,
                f"resource {r.name!r} is consumed by "
                f"{', '.join(r.consumed_by)} but nothing produces it",
                r.name,
                "resource",
            )

    errors.extend(_cycle_errors(spec, line_of, path))
    return errors


def _cycle_errors(spec: SpecFile, line_of, path: str) -> list[ValidationError]:
    """CyclicType for by-value containment cycles (pointers break cycles)."""
    defs = {t.name: t for t in spec.types}

    def value_edges(t: StructDef):
        out = []
        for f in t.fields:
            out.extend(_value_refs(f))
        return out

    def _value_refs(f: Field):
        refs = []
        stack = [f.type]
        while stack:
            node = stack.pop()
            if isinstance(node, PtrType):
                continue  # indirection breaks the containment chain
            if isinstance(node, ArrayType):
                stack.append(node.elem)
            elif isinstance(node, NamedType) and node.name in defs:
                refs.append(node.name)
        return refs

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: WHITE for name in defs}
    cycle_entries: list[str] = []

    def visit(name: str):
        color[name] = GRAY
        for nxt in value_edges(defs[name]):
            if color[nxt] == GRAY:
                if nxt not in cycle_entries:
                    cycle_entries.append(nxt)
            elif color[nxt] == WHITE:
                visit(nxt)
        color[name] = BLACK

    for name in defs:
        if color[name] == WHITE:
            visit(name)

    return [
        ValidationError(
            code=ErrorCode.CYCLIC_TYPE,
            message=f"type {name!r} contains itself by value",
            target=name,
            location=(path, line_of.get(("type", name), 0)),
        )
        for name in cycle_entries
    ]
