"""Canonical spec rendering.

One declaration per line (struct/union fields tab-indented), groups in a
fixed order, no timestamps or other run-varying output: renders are
byte-stable so golden tests and diffs work.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import (
    ArrayType,
    ConstType,
    FlagsType,
    IntType,
    LenType,
    NamedType,
    PtrType,
    SpecFile,
    StringType,
    StructDef,
    SyscallDesc,
    TypeExpr,
)


@dataclass(frozen=True)
class DeclSpan:
    """Line range of one rendered declaration, for error matching."""

    kind: str  # include, resource, flags, type, syscall
    name: str
    start_line: int
    end_line: int


def render_type(t: TypeExpr) -> str:
    if isinstance(t, ConstType):
        return f"const[{t.value}]"
    if isinstance(t, IntType):
        base = "intptr" if t.bits is None else f"int{t.bits}"
        if t.range is not None:
            return f"{base}[{t.range[0]}:{t.range[1]}]"
        return base
    if isinstance(t, FlagsType):
        return f"flags[{t.set_name}]"
    if isinstance(t, PtrType):
        return f"ptr[{t.direction.value}, {render_type(t.elem)}]"
    if isinstance(t, ArrayType):
        if t.length is not None:
            return f"array[{render_type(t.elem)}, {t.length}]"
        return f"array[{render_type(t.elem)}]"
    if isinstance(t, StringType):
        if t.value is not None:
            return f'string["{t.value}"]'
        return "string"
    if isinstance(t, LenType):
        return f"len[{t.path}]"
    if isinstance(t, NamedType):
        return t.name
    raise TypeError(f"unrenderable type node: {t!r}")


def _render_struct(t: StructDef) -> list[str]:
    opener, closer = ("[", "]") if t.is_union else ("{", "}")
    lines = []
    if t.comment:
        lines.append(f"# {t.comment}")
    lines.append(f"{t.name} {opener}")
    for f in t.fields:
        line = f"\t{f.name}\t{render_type(f.type)}"
        if f.direction is not None:
            line += f"\t({f.direction.value})"
        lines.append(line)
    lines.append(closer)
    return lines


def _render_syscall(sc: SyscallDesc) -> list[str]:
    lines = []
    if sc.comment:
        lines.append(f"# {sc.comment}")
    params = ", ".join(f"{n} {render_type(t)}" for n, t in sc.params)
    line = f"{sc.full_name}({params})"
    if sc.ret:
        line += f" {sc.ret}"
    lines.append(line)
    return lines


def render_spec_with_map(spec: SpecFile) -> tuple[str, list[DeclSpan]]:
    """Render and report each declaration's (1-based) line span."""
    out: list[str] = []
    spans: list[DeclSpan] = []

    def emit(kind: str, name: str, lines: list[str]):
        start = len(out) + 1
        out.extend(lines)
        spans.append(DeclSpan(kind, name, start, len(out)))

    def gap():
        if out:
            out.append("")

    if spec.includes:
        for inc in spec.includes:
            emit("include", inc, [f"include <{inc}>"])
    if spec.resources:
        gap()
        for r in spec.resources:
            emit("resource", r.name, [f"resource {r.name}[{r.underlying}]"])
    if spec.flag_sets:
        gap()
        for fs in spec.flag_sets:
            emit("flags", fs.name, [f"{fs.name} = " + ", ".join(fs.values)])
    if spec.types:
        gap()
        for t in spec.types:
            emit("type", t.name, _render_struct(t))
    if spec.syscalls:
        gap()
        for sc in spec.syscalls:
            emit("syscall", sc.full_name, _render_syscall(sc))

    if not out:
        return "", []
    return "\n".join(out) + "\n", spans


def render_spec(spec: SpecFile) -> str:
    return render_spec_with_map(spec)[0]


def render_const_file(spec: SpecFile) -> str:
    """Sidecar constants file: `NAME = integer`, sorted by name."""
    lines = [f"{name} = {spec.constants[name]}" for name in sorted(spec.constants)]
    if not lines:
        return ""
    return "\n".join(lines) + "\n"
