"""Line-oriented parser for the syzlang subset.

The grammar we accept is documented in docs/syzlang-subset.md. Constructs
outside the subset (templates, conditional fields, csum, vma, proc, text)
are rejected by name so the failure mode is explicit rather than a
mis-parse.
"""

from __future__ import annotations

import re

from .ast import (
    ArrayType,
    ConstType,
    Direction,
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
    link_resources,
)

# syscall bases whose command argument selects the operation
GENERIC_SYSCALLS = ("ioctl", "setsockopt", "getsockopt")

_UNSUPPORTED_TYPES = {
    "csum": "csum",
    "vma": "vma",
    "vma64": "vma",
    "proc": "proc",
    "text": "text",
    "glob": "glob",
}

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT_RE = re.compile(r"-?(0[xX][0-9a-fA-F]+|\d+)")
_DIR_SUFFIX_RE = re.compile(r"\((in|out|inout)\)\s*$")
_COND_SUFFIX_RE = re.compile(r"\(if\[")


class SyzlangSyntaxError(Exception):
    """Parse failure with position and what was expected there."""

    def __init__(self, line: int, col: int, expected: str):
        self.line = line
        self.col = col
        self.expected = expected
        super().__init__(f"line {line}, col {col}: expected {expected}")


def parse_spec(text: str) -> SpecFile:
    """Parse a spec document; raises SyzlangSyntaxError on bad input."""
    includes: list[str] = []
    resources: list[ResourceDecl] = []
    flag_sets: list[FlagSet] = []
    types: list[StructDef] = []
    syscalls: list[SyscallDesc] = []

    lines = text.split("\n")
    pending_comment: str | None = None
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i]
        stripped = line.strip()
        i += 1
        if not stripped:
            continue
        if stripped.startswith("#"):
            pending_comment = stripped[1:].strip()
            continue

        if stripped.startswith("include"):
            m = re.fullmatch(r"include\s*<([^<>]+)>", stripped)
            if not m:
                raise SyzlangSyntaxError(lineno, 1, "include <path>")
            includes.append(m.group(1))
            pending_comment = None
            continue

        if stripped.startswith("resource") and re.match(r"resource\b", stripped):
            m = re.fullmatch(
                r"resource\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*([A-Za-z_][A-Za-z0-9_]*)\s*\]",
                stripped,
            )
            if not m:
                raise SyzlangSyntaxError(lineno, 1, "resource name[underlying]")
            resources.append(ResourceDecl(name=m.group(1), underlying=m.group(2)))
            pending_comment = None
            continue

        # struct / union opener: `name {` or `name [`
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s*([{\[])", stripped)
        if m:
            is_union = m.group(2) == "["
            closer = "]" if is_union else "}"
            fields, i = _parse_fields(lines, i, closer)
            types.append(
                StructDef(
                    name=m.group(1),
                    fields=tuple(fields),
                    is_union=is_union,
                    comment=pending_comment,
                )
            )
            pending_comment = None
            continue

        if "(" in stripped and (
            "=" not in stripped or stripped.index("(") < stripped.index("=")
        ):
            syscalls.append(_parse_syscall(stripped, lineno, pending_comment))
            pending_comment = None
            continue

        if "=" in stripped:
            name_part, _, values_part = stripped.partition("=")
            name = name_part.strip()
            if not _IDENT_RE.fullmatch(name):
                raise SyzlangSyntaxError(lineno, 1, "flag set name")
            values = [v.strip() for v in values_part.split(",")]
            if not all(values) or not values:
                raise SyzlangSyntaxError(
                    lineno, stripped.index("=") + 2, "comma-separated flag values"
                )
            flag_sets.append(FlagSet(name=name, values=tuple(values)))
            pending_comment = None
            continue

        raise SyzlangSyntaxError(
            lineno, 1, "include, resource, flag set, type, or syscall declaration"
        )

    spec = SpecFile(
        includes=tuple(includes),
        resources=tuple(resources),
        flag_sets=tuple(flag_sets),
        types=tuple(types),
        syscalls=tuple(syscalls),
    )
    return link_resources(spec)


def _parse_fields(lines: list[str], i: int, closer: str):
    fields: list[Field] = []
    while i < len(lines):
        lineno = i + 1
        stripped = lines[i].strip()
        i += 1
        if not stripped or stripped.startswith("#"):
            continue
        if stripped == closer:
            return fields, i
        m = _IDENT_RE.match(stripped)
        if not m or m.start() != 0:
            raise SyzlangSyntaxError(lineno, 1, "field name")
        fname = m.group(0)
        rest = stripped[m.end():].strip()
        if not rest:
            raise SyzlangSyntaxError(lineno, m.end() + 1, "field type")
        direction = None
        dm = _DIR_SUFFIX_RE.search(rest)
        if dm:
            direction = Direction(dm.group(1))
            rest = rest[: dm.start()].strip()
        elif _COND_SUFFIX_RE.search(rest):
            raise SyzlangSyntaxError(
                lineno, 1, "supported field attribute (conditional fields are not)"
            )
        ftype = parse_type(rest, lineno)
        fields.append(Field(name=fname, type=ftype, direction=direction))
    raise SyzlangSyntaxError(len(lines), 1, f"closing {closer!r}")


def _parse_syscall(stripped: str, lineno: int, comment: str | None) -> SyscallDesc:
    open_paren = stripped.index("(")
    name = stripped[:open_paren].strip()
    m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\$([A-Za-z0-9_]+))?", name)
    if not m:
        raise SyzlangSyntaxError(lineno, 1, "syscall name (base or base$variant)")
    base, variant = m.group(1), m.group(2) or ""

    close_paren = _matching_paren(stripped, open_paren)
    if close_paren < 0:
        raise SyzlangSyntaxError(lineno, len(stripped) + 1, "')'")
    params_text = stripped[open_paren + 1 : close_paren]
    ret_text = stripped[close_paren + 1 :].strip()
    ret = None
    if ret_text:
        if not _IDENT_RE.fullmatch(ret_text):
            raise SyzlangSyntaxError(lineno, close_paren + 2, "return resource name")
        ret = ret_text

    params: list[tuple[str, TypeExpr]] = []
    for chunk in _split_top(params_text):
        chunk = chunk.strip()
        if not chunk:
            continue
        pm = _IDENT_RE.match(chunk)
        if not pm:
            raise SyzlangSyntaxError(lineno, open_paren + 2, "parameter name")
        pname = pm.group(0)
        ptext = chunk[pm.end():].strip()
        if not ptext:
            raise SyzlangSyntaxError(lineno, open_paren + 2, "parameter type")
        params.append((pname, parse_type(ptext, lineno)))

    identifier_const = None
    if base in GENERIC_SYSCALLS:
        for _pname, ptype in params:
            if isinstance(ptype, ConstType) and not _INT_RE.fullmatch(ptype.value):
                identifier_const = ptype.value
                break

    return SyscallDesc(
        base_name=base,
        variant=variant,
        params=tuple(params),
        ret=ret,
        comment=comment,
        identifier_const=identifier_const,
    )


def _matching_paren(s: str, start: int) -> int:
    depth = 0
    in_str = False
    for j in range(start, len(s)):
        c = s[j]
        if in_str:
            if c == '"' and s[j - 1] != "\\":
                in_str = False
            continue
        if c == '"':
            in_str = True
        elif c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
            if depth == 0:
                return j
    return -1


def _split_top(s: str) -> list[str]:
    """Split on commas not nested in brackets or strings."""
    parts = []
    depth = 0
    in_str = False
    last = 0
    for j, c in enumerate(s):
        if in_str:
            if c == '"' and s[j - 1] != "\\":
                in_str = False
            continue
        if c == '"':
            in_str = True
        elif c in "([":
            depth += 1
        elif c in ")]":
            depth -= 1
        elif c == "," and depth == 0:
            parts.append(s[last:j])
            last = j + 1
    parts.append(s[last:])
    return parts


def parse_type(text: str, lineno: int = 0) -> TypeExpr:
    """Parse one type expression, e.g. `ptr[in, array[int8, 16]]`."""
    text = text.strip()
    m = _IDENT_RE.match(text)
    if not m or m.start() != 0:
        raise SyzlangSyntaxError(lineno, 1, "type name")
    head = m.group(0)
    rest = text[m.end():].strip()

    if head in _UNSUPPORTED_TYPES:
        raise SyzlangSyntaxError(
            lineno, 1, f"supported type ({_UNSUPPORTED_TYPES[head]} is not in the subset)"
        )

    args: list[str] | None = None
    if rest:
        if not (rest.startswith("[") and rest.endswith("]")):
            raise SyzlangSyntaxError(lineno, 1, f"well-formed type arguments for {head}")
        args = [a.strip() for a in _split_top(rest[1:-1])]

    if head == "const":
        if not args or len(args) != 1:
            raise SyzlangSyntaxError(lineno, 1, "const[value]")
        v = args[0]
        if not (_INT_RE.fullmatch(v) or _IDENT_RE.fullmatch(v)):
            raise SyzlangSyntaxError(lineno, 1, "integer or constant name in const[...]")
        return ConstType(value=v)

    if head in ("int8", "int16", "int32", "int64", "intptr"):
        bits = None if head == "intptr" else int(head[3:])
        if args is None:
            return IntType(bits=bits)
        if len(args) != 1 or ":" not in args[0]:
            raise SyzlangSyntaxError(lineno, 1, f"{head}[lo:hi]")
        lo_s, _, hi_s = args[0].partition(":")
        try:
            lo, hi = int(lo_s.strip(), 0), int(hi_s.strip(), 0)
        except ValueError:
            raise SyzlangSyntaxError(lineno, 1, "integer range bounds") from None
        return IntType(bits=bits, range=(lo, hi))

    if head == "flags":
        if not args or len(args) != 1 or not _IDENT_RE.fullmatch(args[0]):
            raise SyzlangSyntaxError(lineno, 1, "flags[set-name]")
        return FlagsType(set_name=args[0])

    if head == "ptr":
        if not args or len(args) != 2:
            raise SyzlangSyntaxError(lineno, 1, "ptr[dir, type]")
        try:
            direction = Direction(args[0])
        except ValueError:
            raise SyzlangSyntaxError(lineno, 1, "ptr direction in/out/inout") from None
        return PtrType(direction=direction, elem=parse_type(args[1], lineno))

    if head == "array":
        if not args or len(args) not in (1, 2):
            raise SyzlangSyntaxError(lineno, 1, "array[type] or array[type, length]")
        elem = parse_type(args[0], lineno)
        length = None
        if len(args) == 2:
            length = args[1]
            if not (_IDENT_RE.fullmatch(length) or re.fullmatch(r"\d+|0[xX][0-9a-fA-F]+", length)):
                raise SyzlangSyntaxError(lineno, 1, "constant array length")
        return ArrayType(elem=elem, length=length)

    if head == "string":
        if args is None:
            return StringType()
        if len(args) != 1 or not (args[0].startswith('"') and args[0].endswith('"')):
            raise SyzlangSyntaxError(lineno, 1, 'string["literal"]')
        return StringType(value=args[0][1:-1])

    if head == "len":
        if not args or len(args) != 1:
            raise SyzlangSyntaxError(lineno, 1, "len[field-path]")
        path = args[0]
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*", path):
            raise SyzlangSyntaxError(lineno, 1, "field path in len[...]")
        return LenType(path=path)

    if args is not None:
        # named type with arguments would be a template instantiation
        raise SyzlangSyntaxError(
            lineno, 1, "supported type (template instantiation is not in the subset)"
        )
    return NamedType(name=head)
