"""AST for the supported syzlang subset.

Everything is a frozen dataclass with tuple children so specs hash and
compare structurally. Fields that carry derived or pipeline-side metadata
(resource linkage, source handler, resolved constants) are excluded from
comparison: round-trip identity is about the written syntax.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Direction(str, enum.Enum):
    IN = "in"
    OUT = "out"
    INOUT = "inout"


# --- type expressions ------------------------------------------------------

class TypeExpr:
    """Base marker for type expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class ConstType(TypeExpr):
    """const[value]; value is an integer literal or a constant name."""

    value: str


@dataclass(frozen=True)
class IntType(TypeExpr):
    """int8/int16/int32/int64/intptr, optionally ranged `[lo:hi]`."""

    bits: int | None  # None for intptr
    range: tuple[int, int] | None = None


@dataclass(frozen=True)
class FlagsType(TypeExpr):
    """flags[set-name], referencing a flag set declared in the file."""

    set_name: str


@dataclass(frozen=True)
class PtrType(TypeExpr):
    direction: Direction
    elem: "TypeExpr"


@dataclass(frozen=True)
class ArrayType(TypeExpr):
    """array[T] (variable length) or array[T, N] with constant N."""

    elem: "TypeExpr"
    length: str | None = None  # decimal literal or constant name


@dataclass(frozen=True)
class StringType(TypeExpr):
    """string, or string["literal"] pinning the exact value."""

    value: str | None = None


@dataclass(frozen=True)
class LenType(TypeExpr):
    """len[path]: byte/element count of a sibling field."""

    path: str


@dataclass(frozen=True)
class NamedType(TypeExpr):
    """Reference to a struct, union, or resource by name."""

    name: str


# --- declarations ----------------------------------------------------------

@dataclass(frozen=True)
class Field:
    name: str
    type: TypeExpr
    direction: Direction | None = None


@dataclass(frozen=True)
class StructDef:
    """Struct (brace body) or union (bracket body) definition."""

    name: str
    fields: tuple[Field, ...]
    is_union: bool = False
    comment: str | None = None


@dataclass(frozen=True)
class FlagSet:
    """`name = A, B, C` — a named list of constant values."""

    name: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class ResourceDecl:
    """`resource name[underlying]`.

    produced_by/consumed_by are derived from the syscalls of the owning
    SpecFile by link_resources, not written in the syntax.
    """

    name: str
    underlying: str
    produced_by: tuple[str, ...] = field(default=(), compare=False)
    consumed_by: tuple[str, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class SyscallDesc:
    """One syscall variant: `base$variant(params...) ret`."""

    base_name: str
    variant: str = ""
    params: tuple[tuple[str, TypeExpr], ...] = ()
    ret: str | None = None
    comment: str | None = None
    # pipeline metadata, not part of the written syntax
    source_handler: str | None = field(default=None, compare=False)
    identifier_const: str | None = field(default=None, compare=False)

    @property
    def full_name(self) -> str:
        if self.variant:
            return f"{self.base_name}${self.variant}"
        return self.base_name


@dataclass(frozen=True)
class SpecFile:
    includes: tuple[str, ...] = ()
    resources: tuple[ResourceDecl, ...] = ()
    flag_sets: tuple[FlagSet, ...] = ()
    types: tuple[StructDef, ...] = ()
    syscalls: tuple[SyscallDesc, ...] = ()
    # name -> resolved integer, filled by resolve_constants
    constants: dict = field(default_factory=dict, compare=False)

    def is_empty(self) -> bool:
        return not (
            self.includes or self.resources or self.flag_sets
            or self.types or self.syscalls
        )

    def type_names(self) -> set:
        return {t.name for t in self.types}

    def resource_names(self) -> set:
        return {r.name for r in self.resources}


class ErrorCode(str, enum.Enum):
    UNDEFINED_TYPE = "UndefinedType"
    UNKNOWN_CONSTANT = "UnknownConstant"
    NON_CONSTANT_ARRAY_LENGTH = "NonConstantArrayLength"
    UNMATCHED_DEPENDENCY = "UnmatchedDependency"
    DUPLICATE_SYSCALL = "DuplicateSyscall"
    ILLEGAL_RANGE = "IllegalRange"
    CYCLIC_TYPE = "CyclicType"
    SYNTAX_ERROR = "SyntaxError"


@dataclass(frozen=True)
class ValidationError:
    code: ErrorCode
    message: str
    target: str
    location: tuple[str, int] = ("", 0)  # (file label, line in rendered spec)

    def to_dict(self) -> dict:
        return {
            "code": self.code.value,
            "message": self.message,
            "target": self.target,
            "location": {"file": self.location[0], "line": self.location[1]},
        }


def walk_type(t: TypeExpr):
    """Yield t and every nested TypeExpr, outermost first."""
    yield t
    if isinstance(t, PtrType):
        yield from walk_type(t.elem)
    elif isinstance(t, ArrayType):
        yield from walk_type(t.elem)


def link_resources(spec: SpecFile) -> SpecFile:
    """Recompute produced_by/consumed_by on every resource declaration."""
    produced: dict[str, list] = {r.name: [] for r in spec.resources}
    consumed: dict[str, list] = {r.name: [] for r in spec.resources}
    for sc in spec.syscalls:
        if sc.ret in produced:
            produced[sc.ret].append(sc.full_name)
        seen = set()
        for _pname, ptype in sc.params:
            for node in walk_type(ptype):
                if isinstance(node, NamedType) and node.name in consumed:
                    if node.name not in seen:
                        consumed[node.name].append(sc.full_name)
                        seen.add(node.name)
    resources = tuple(
        ResourceDecl(
            name=r.name,
            underlying=r.underlying,
            produced_by=tuple(produced[r.name]),
            consumed_by=tuple(consumed[r.name]),
        )
        for r in spec.resources
    )
    return SpecFile(
        includes=spec.includes,
        resources=resources,
        flag_sets=spec.flag_sets,
        types=spec.types,
        syscalls=spec.syscalls,
        constants=spec.constants,
    )
