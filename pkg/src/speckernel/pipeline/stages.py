"""The four analysis stages for one handler.

Each stage wraps one recursive analyze() run and turns its merged result
dict into typed findings. All model-facing schemas live here so the
prompt assets, the scripted fixtures, and this parsing stay in one
agreement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from speckernel.engine import AnalysisContext, Stage, analyze
from speckernel.indexer import HandlerRegistration, extract_code, find_usages
from speckernel.syzlang import SyzlangSyntaxError, parse_spec, parse_type
from speckernel.syzlang.ast import ArrayType, Direction, IntType, PtrType, StructDef, TypeExpr

# ioctl-like trigger fields, in the order we analyze them
IOCTL_TRIGGERS = ("unlocked_ioctl", "ioctl", "compat_ioctl")
SOCKOPT_TRIGGERS = ("setsockopt", "getsockopt")

FALLBACK_ARG_TYPE = PtrType(direction=Direction.IN, elem=ArrayType(elem=IntType(bits=8)))


class UnresolvedHandlerInit(Exception):
    """The model could not name a device path or socket triple."""

    def __init__(self, handler: str, detail: str):
        self.handler = handler
        super().__init__(f"{handler}: {detail}")


@dataclass(frozen=True)
class HandlerInitSpec:
    kind: str  # "driver" or "socket"
    resource_name: str
    variant: str
    init_syscall: str  # openat, syz_open_dev, or socket
    device_path: str | None = None
    socket_domain: str | None = None
    socket_type: str | None = None
    socket_protocol: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "resource_name": self.resource_name,
            "variant": self.variant,
            "init_syscall": self.init_syscall,
            "device_path": self.device_path,
            "socket_domain": self.socket_domain,
            "socket_type": self.socket_type,
            "socket_protocol": self.socket_protocol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HandlerInitSpec":
        return cls(**d)


@dataclass(frozen=True)
class IdentifierFinding:
    const_name: str
    handling_function: str
    usage_info: str = ""
    modified: bool = False
    trigger: str = "unlocked_ioctl"  # which bound op this came from

    def to_dict(self) -> dict:
        return {
            "const_name": self.const_name,
            "handling_function": self.handling_function,
            "usage_info": self.usage_info,
            "modified": self.modified,
            "trigger": self.trigger,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IdentifierFinding":
        return cls(**d)


@dataclass(frozen=True)
class TypeFinding:
    identifier: str
    arg_type: TypeExpr
    pending_types: tuple[str, ...] = ()
    fell_back: bool = False


@dataclass(frozen=True)
class DependencyFinding:
    producer_syscall: str  # identifier const of the producing command
    resource_name: str
    consumer_handlers: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "producer_syscall": self.producer_syscall,
            "resource_name": self.resource_name,
            "consumer_handlers": list(self.consumer_handlers),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DependencyFinding":
        return cls(
            producer_syscall=d["producer_syscall"],
            resource_name=d["resource_name"],
            consumer_handlers=tuple(d["consumer_handlers"]),
        )


def sanitize_variant(name: str) -> str:
    out = re.sub(r"[^A-Za-z0-9_]+", "_", name).strip("_").lower()
    return out or "dev"


def infer_handler_init(
    handler: HandlerRegistration, ctx: AnalysisContext
) -> HandlerInitSpec:
    """Work out the opening syscall for this handler."""
    related = [d.text for d in extract_code(ctx.db, handler.struct_name)]
    usages = [u.snippet for u in handler.usages]
    if not usages:
        usages = [u.snippet for u in find_usages(ctx.db, handler.struct_name)]
    ctx.visited.add(handler.struct_name)
    result = analyze(related, usages, 1, Stage.HANDLER_INIT, ctx)

    kind = result.get("handler_kind")
    if kind == "socket":
        domain = result.get("socket_domain")
        stype = result.get("socket_type")
        proto = result.get("socket_protocol", "0")
        if not domain or not stype:
            raise UnresolvedHandlerInit(
                handler.struct_name, "socket registration without a full triple"
            )
        variant = sanitize_variant(re.sub(r"^(AF|PF)_", "", str(domain)))
        return HandlerInitSpec(
            kind="socket",
            resource_name=f"sock_{variant}",
            variant=variant,
            init_syscall="socket",
            socket_domain=str(domain),
            socket_type=str(stype),
            socket_protocol=str(proto),
        )

    device = result.get("device_name")
    if not device:
        raise UnresolvedHandlerInit(
            handler.struct_name, "no device name resolved after analysis"
        )
    device = str(device)
    path = device if device.startswith("/") else f"/dev/{device}"
    resource = str(result.get("resource_name") or "")
    if not re.fullmatch(r"fd_[a-z0-9_]+", resource):
        resource = "fd_" + sanitize_variant(path.removeprefix("/dev/"))
    variant = resource.removeprefix("fd_")
    init_syscall = "syz_open_dev" if "#" in path else "openat"
    return HandlerInitSpec(
        kind="driver",
        resource_name=resource,
        variant=variant,
        init_syscall=init_syscall,
        device_path=path,
    )


def deduce_identifiers(
    handler: HandlerRegistration,
    init: HandlerInitSpec,
    ctx: AnalysisContext,
) -> tuple[list[IdentifierFinding], list[str]]:
    """Identifier findings plus the functions marked return-relevant."""
    triggers = [
        f for f in (*IOCTL_TRIGGERS, *SOCKOPT_TRIGGERS) if f in handler.bound_ops
    ]
    findings: list[IdentifierFinding] = []
    seen_consts = set()
    return_relevant: list[str] = []

    for trig in triggers:
        fn = handler.bound_ops[trig]
        defs = extract_code(ctx.db, fn)
        if not defs:
            ctx.note(f"identifier_deduction: handler function {fn!r} not in the index")
            continue
        ctx.visited.add(fn)
        result = analyze(
            [d.text for d in defs],
            [f"{fn} is bound to the {trig} field of {handler.struct_name}"],
            1,
            Stage.IDENTIFIER_DEDUCTION,
            ctx,
        )
        for entry in result.get("identifiers", []):
            if not isinstance(entry, dict):
                continue
            name = str(entry.get("name", "")).strip()
            if not name or name in seen_consts:
                continue
            seen_consts.add(name)
            findings.append(
                IdentifierFinding(
                    const_name=name,
                    handling_function=str(entry.get("function", fn) or fn),
                    usage_info=str(entry.get("usage", "")),
                    modified=bool(entry.get("modified", False)),
                    trigger=trig,
                )
            )
        for fn_name in result.get("return_relevant", []):
            if isinstance(fn_name, str) and fn_name not in return_relevant:
                return_relevant.append(fn_name)
    return findings, return_relevant


def recover_types(
    findings: list[IdentifierFinding], ctx: AnalysisContext
) -> tuple[list[TypeFinding], list[StructDef]]:
    """Argument types per identifier plus every struct/union they need."""
    type_findings: list[TypeFinding] = []
    pending: list[str] = []

    for finding in findings:
        defs = extract_code(ctx.db, finding.handling_function)
        if not defs:
            ctx.note(
                f"type_recovery: no source for {finding.handling_function!r}, "
                f"falling back for {finding.const_name}"
            )
            type_findings.append(
                TypeFinding(
                    identifier=finding.const_name,
                    arg_type=FALLBACK_ARG_TYPE,
                    fell_back=True,
                )
            )
            continue
        ctx.visited.add(finding.handling_function)
        result = analyze(
            [d.text for d in defs],
            [f"identifier: {finding.const_name}", finding.usage_info],
            1,
            Stage.TYPE_RECOVERY,
            ctx,
        )
        entry = next(
            (
                e
                for e in result.get("types", [])
                if isinstance(e, dict) and e.get("identifier") == finding.const_name
            ),
            None,
        )
        if entry is None:
            ctx.note(
                f"type_recovery: no type reported for {finding.const_name}, falling back"
            )
            type_findings.append(
                TypeFinding(
                    identifier=finding.const_name,
                    arg_type=FALLBACK_ARG_TYPE,
                    fell_back=True,
                )
            )
            continue
        arg_text = str(entry.get("arg_type", "")).strip()
        entry_pending = tuple(
            str(p) for p in entry.get("pending", []) if isinstance(p, str)
        )
        try:
            arg_type = parse_type(arg_text)
        except SyzlangSyntaxError:
            ctx.note(
                f"type_recovery: unparsable type {arg_text!r} for "
                f"{finding.const_name}, falling back"
            )
            type_findings.append(
                TypeFinding(
                    identifier=finding.const_name,
                    arg_type=FALLBACK_ARG_TYPE,
                    fell_back=True,
                )
            )
            continue
        type_findings.append(
            TypeFinding(
                identifier=finding.const_name,
                arg_type=arg_type,
                pending_types=entry_pending,
            )
        )
        for p in entry_pending:
            if p not in pending:
                pending.append(p)

    struct_defs = _define_types(pending, ctx)

    # anything still unresolved degrades that syscall to a byte-array arg
    defined = {sd.name for sd in struct_defs}
    resolved_findings: list[TypeFinding] = []
    for tf in type_findings:
        missing = [p for p in tf.pending_types if p not in defined]
        if missing:
            ctx.note(
                f"type_recovery: unresolved type(s) {', '.join(missing)} for "
                f"{tf.identifier}, falling back"
            )
            resolved_findings.append(
                TypeFinding(
                    identifier=tf.identifier,
                    arg_type=FALLBACK_ARG_TYPE,
                    pending_types=tf.pending_types,
                    fell_back=True,
                )
            )
        else:
            resolved_findings.append(tf)
    return resolved_findings, struct_defs


def _define_types(pending: list[str], ctx: AnalysisContext) -> list[StructDef]:
    """Run type-definition analysis for every pending C type name."""
    struct_defs: list[StructDef] = []
    defined: set[str] = set()
    for type_name in pending:
        if type_name in defined:
            continue
        defs = [
            d
            for d in extract_code(ctx.db, type_name)
            if d.kind in ("struct", "union", "enum")
        ]
        if not defs:
            ctx.note(f"type_definition: no C definition found for {type_name!r}")
            continue
        ctx.visited.add(type_name)
        result = analyze(
            [d.text for d in defs],
            [f"definition requested for {type_name}"],
            1,
            Stage.TYPE_DEFINITION,
            ctx,
        )
        for entry in result.get("definitions", []):
            if not isinstance(entry, dict):
                continue
            text = str(entry.get("text", ""))
            try:
                fragment = parse_spec(text)
            except SyzlangSyntaxError as e:
                ctx.note(
                    f"type_definition: reply for {entry.get('name')!r} does not "
                    f"parse ({e}), dropped"
                )
                continue
            for sd in fragment.types:
                if sd.name not in defined:
                    defined.add(sd.name)
                    struct_defs.append(sd)
    return struct_defs


def analyze_dependencies(
    handler: HandlerRegistration,
    init: HandlerInitSpec,
    findings: list[IdentifierFinding],
    return_relevant: list[str],
    ctx: AnalysisContext,
    known_handlers: tuple[str, ...] = (),
) -> list[DependencyFinding]:
    """Resource-producing commands and the handlers consuming them."""
    if not return_relevant:
        return []
    related = []
    for fn in return_relevant:
        related.extend(d.text for d in extract_code(ctx.db, fn))
    if not related:
        ctx.note("dependency_analysis: marked functions missing from the index")
        return []
    usage = [
        "known operation handler structs: " + ", ".join(known_handlers)
        if known_handlers
        else "no other operation handler structs indexed"
    ]
    for fn in return_relevant:
        ctx.visited.add(fn)
    result = analyze(related, usage, 1, Stage.DEPENDENCY_ANALYSIS, ctx)

    out: list[DependencyFinding] = []
    seen = set()
    for entry in result.get("dependencies", []):
        if not isinstance(entry, dict):
            continue
        producer = str(entry.get("producer", "")).strip()
        resource = str(entry.get("resource", "")).strip()
        consumers = tuple(
            str(c) for c in entry.get("consumers", []) if isinstance(c, str)
        )
        if not producer or not resource or resource in seen:
            continue
        if not re.fullmatch(r"[a-z][a-z0-9_]*", resource):
            ctx.note(f"dependency_analysis: odd resource name {resource!r}, skipped")
            continue
        seen.add(resource)
        out.append(
            DependencyFinding(
                producer_syscall=producer,
                resource_name=resource,
                consumer_handlers=consumers,
            )
        )
    return out
