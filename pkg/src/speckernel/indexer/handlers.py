"""Operation-handler discovery.

Walks the indexed global struct initializers looking for bindings of the
trigger fields (ioctl, unlocked_ioctl, setsockopt, ...). Designated
initializers are the normal case in kernel code; positional initializers
are resolved against a built-in field-order table for the common handler
struct types, overridable per call.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import _lexer, scan
from .database import DefinitionDatabase, UsageReference, find_usages

DEFAULT_TRIGGER_FIELDS = (
    "ioctl",
    "unlocked_ioctl",
    "compat_ioctl",
    "setsockopt",
    "getsockopt",
)

KIND_FILE_OPS = "file_operations"
KIND_PROTO_OPS = "proto_ops"
KIND_MISC_DEVICE = "miscdevice"
KIND_OTHER = "other"

_STRUCT_KINDS = {
    "file_operations": KIND_FILE_OPS,
    "proto_ops": KIND_PROTO_OPS,
    "miscdevice": KIND_MISC_DEVICE,
}

# Positional field order for the handler structs we classify. Abridged to
# the leading members seen in initializers without designators; kernel
# code essentially never does this, so a short prefix is enough.
DEFAULT_FIELD_ORDER = {
    "file_operations": (
        "owner", "llseek", "read", "write", "read_iter", "write_iter",
        "poll", "unlocked_ioctl", "compat_ioctl", "mmap", "open", "flush",
        "release", "fsync",
    ),
    "proto_ops": (
        "family", "owner", "release", "bind", "connect", "socketpair",
        "accept", "getname", "poll", "ioctl", "listen", "shutdown",
        "setsockopt", "getsockopt", "sendmsg", "recvmsg", "mmap",
    ),
}

# initializer values that are identifiers but never handler functions
_NON_FUNCTION_VALUES = {"NULL", "THIS_MODULE"}


@dataclass(frozen=True)
class HandlerRegistration:
    struct_name: str
    kind: str
    bound_ops: dict[str, str]
    file: str
    line: int
    usages: tuple[UsageReference, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "struct_name": self.struct_name,
            "kind": self.kind,
            "bound_ops": dict(sorted(self.bound_ops.items())),
            "file": self.file,
            "line": self.line,
            "usages": [u.to_dict() for u in self.usages],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HandlerRegistration":
        return cls(
            struct_name=d["struct_name"],
            kind=d["kind"],
            bound_ops=dict(d["bound_ops"]),
            file=d["file"],
            line=d["line"],
            usages=tuple(
                UsageReference(u["identifier"], u["file"], u["line"], u["snippet"])
                for u in d.get("usages", ())
            ),
        )


def find_operation_handlers(
    db: DefinitionDatabase,
    trigger_fields: tuple[str, ...] = DEFAULT_TRIGGER_FIELDS,
    field_order: dict[str, tuple[str, ...]] | None = None,
) -> list[HandlerRegistration]:
    """One HandlerRegistration per global initializer binding a trigger field."""
    if not trigger_fields:
        raise ValueError("trigger_fields must be non-empty")
    order_tables = dict(DEFAULT_FIELD_ORDER)
    if field_order:
        order_tables.update(field_order)
    found: list[HandlerRegistration] = []
    for rel in db.files:
        for d in db.file_index.get(rel, ()):
            if d.kind != scan.KIND_GLOBALVAR:
                continue
            struct_type = _declared_struct_type(d.text)
            bound = _initializer_bindings(d.text, struct_type, order_tables)
            if not bound:
                continue
            if not any(f in bound for f in trigger_fields):
                continue
            found.append(
                HandlerRegistration(
                    struct_name=d.name,
                    kind=_STRUCT_KINDS.get(struct_type or "", KIND_OTHER),
                    bound_ops=bound,
                    file=d.file,
                    line=d.line_span[0],
                    usages=tuple(find_usages(db, d.name)),
                )
            )
    found.sort(key=lambda h: (h.file, h.line))
    return found


def _declared_struct_type(decl_text: str) -> str | None:
    toks = _lexer.tokenize(decl_text)
    for i, (kind, value, _line, _off) in enumerate(toks):
        if kind == _lexer.IDENT and value in ("struct", "union"):
            if i + 1 < len(toks) and toks[i + 1][0] == _lexer.IDENT:
                return toks[i + 1][1]
        if kind == _lexer.PUNCT and value == "=":
            break
    return None


def _initializer_bindings(
    decl_text: str,
    struct_type: str | None,
    order_tables: dict[str, tuple[str, ...]],
) -> dict[str, str]:
    """field -> identifier bindings from the brace initializer."""
    toks = _lexer.tokenize(decl_text)
    eq = None
    depth = 0
    for i, (kind, value, _line, _off) in enumerate(toks):
        if kind != _lexer.PUNCT:
            continue
        if value in "([{":
            depth += 1
        elif value in ")]}":
            depth -= 1
        elif value == "=" and depth == 0:
            eq = i
            break
    if eq is None or eq + 1 >= len(toks) or toks[eq + 1][:2] != (_lexer.PUNCT, "{"):
        return {}

    bound: dict[str, str] = {}
    positional: list[str | None] = []
    saw_designator = False
    i = eq + 2
    depth = 1
    elem_start = True
    while i < len(toks) and depth > 0:
        kind, value = toks[i][0], toks[i][1]
        if kind == _lexer.PUNCT and value in "([{":
            depth += 1
            elem_start = False
        elif kind == _lexer.PUNCT and value in ")]}":
            depth -= 1
        elif depth == 1 and kind == _lexer.PUNCT and value == ",":
            elem_start = True
        elif depth == 1 and elem_start:
            if kind == _lexer.PUNCT and value == ".":
                # .field = value
                if (
                    i + 3 < len(toks)
                    and toks[i + 1][0] == _lexer.IDENT
                    and toks[i + 2][:2] == (_lexer.PUNCT, "=")
                ):
                    saw_designator = True
                    fname = toks[i + 1][1]
                    ident = _binding_value(toks, i + 3)
                    if ident:
                        bound[fname] = ident
                    i += 3
                elem_start = False
            else:
                positional.append(_binding_value(toks, i))
                elem_start = False
        i += 1

    if not saw_designator and positional:
        order = order_tables.get(struct_type or "", ())
        for fname, ident in zip(order, positional):
            if ident:
                bound[fname] = ident
    return bound


def _binding_value(toks, i: int) -> str | None:
    """The bound identifier at element position i, if it is one."""
    if i < len(toks) and toks[i][:2] == (_lexer.PUNCT, "&"):
        i += 1
    if i >= len(toks) or toks[i][0] != _lexer.IDENT:
        return None
    value = toks[i][1]
    if value in _NON_FUNCTION_VALUES:
        return None
    # a call or member expression is not a plain function binding
    if i + 1 < len(toks) and toks[i + 1][0] == _lexer.PUNCT and toks[i + 1][1] in "(.":
        return None
    return value


def handlers_to_json(handlers: list[HandlerRegistration]) -> str:
    doc = {"schema": 1, "handlers": [h.to_dict() for h in handlers]}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def handlers_from_json(text: str) -> list[HandlerRegistration]:
    doc = json.loads(text)
    return [HandlerRegistration.from_dict(h) for h in doc["handlers"]]
