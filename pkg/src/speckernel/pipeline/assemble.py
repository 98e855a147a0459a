"""Combine stage findings into one SpecFile per handler."""

from __future__ import annotations

from speckernel.indexer import DefinitionDatabase
from speckernel.pipeline.stages import (
    FALLBACK_ARG_TYPE,
    SOCKOPT_TRIGGERS,
    DependencyFinding,
    HandlerInitSpec,
    IdentifierFinding,
    TypeFinding,
)
from speckernel.syzlang.ast import (
    ConstType,
    Direction,
    IntType,
    LenType,
    NamedType,
    PtrType,
    SpecFile,
    StringType,
    StructDef,
    SyscallDesc,
    TypeExpr,
    link_resources,
    ResourceDecl,
)


def _init_syscall(init: HandlerInitSpec) -> SyscallDesc:
    if init.kind == "socket":
        params = (
            ("domain", ConstType(init.socket_domain or "0")),
            ("type", ConstType(init.socket_type or "0")),
            ("proto", ConstType(init.socket_protocol or "0")),
        )
        return SyscallDesc(
            base_name="socket",
            variant=init.variant,
            params=params,
            ret=init.resource_name,
        )
    path = init.device_path or "/dev/unknown"
    if init.init_syscall == "syz_open_dev":
        params = (
            ("dev", PtrType(Direction.IN, StringType(path))),
            ("id", IntType(bits=None)),
            ("flags", ConstType("O_RDWR")),
        )
        base = "syz_open_dev"
    else:
        params = (
            ("fd", ConstType("AT_FDCWD")),
            ("file", PtrType(Direction.IN, StringType(path))),
            ("flags", ConstType("O_RDWR")),
            ("mode", ConstType("0")),
        )
        base = "openat"
    return SyscallDesc(
        base_name=base,
        variant=init.variant,
        params=params,
        ret=init.resource_name,
    )


def _command_syscall(
    init: HandlerInitSpec,
    finding: IdentifierFinding,
    arg_type: TypeExpr,
    ret: str | None,
    source_handler: str,
) -> SyscallDesc:
    comment = None
    if finding.modified:
        comment = (
            f"{finding.const_name} is rewritten before comparison in "
            f"{finding.handling_function}; the raw value may not match"
        )
    variant = finding.const_name.lower()
    fd = ("fd", NamedType(init.resource_name))
    cmd_const = ConstType(finding.const_name)

    if finding.trigger in SOCKOPT_TRIGGERS:
        if not isinstance(arg_type, PtrType):
            want = Direction.OUT if finding.trigger == "getsockopt" else Direction.IN
            arg_type = PtrType(want, arg_type)
        params = (
            fd,
            ("level", ConstType("0")),
            ("optname", cmd_const),
            ("optval", arg_type),
            ("optlen", LenType("optval")),
        )
        base = finding.trigger
    else:
        params = (fd, ("cmd", cmd_const), ("arg", arg_type))
        base = "ioctl"
    return SyscallDesc(
        base_name=base,
        variant=variant,
        params=params,
        ret=ret,
        comment=comment,
        source_handler=source_handler,
        identifier_const=finding.const_name,
    )


def _include_lines(
    consts: list[str], db: DefinitionDatabase | None
) -> tuple[str, ...]:
    if db is None:
        return ()
    files = set()
    for name in consts:
        for d in db.definitions.get(name, ()):
            if d.kind == "macro":
                files.add(d.file)
                break
    return tuple(sorted(files))


def assemble_spec(
    init: HandlerInitSpec,
    identifier_findings: list[IdentifierFinding],
    type_findings: list[TypeFinding],
    type_defs: list[StructDef],
    dependency_findings: tuple[DependencyFinding, ...] | list[DependencyFinding] = (),
    db: DefinitionDatabase | None = None,
    source_handler: str = "",
) -> SpecFile:
    """One SpecFile: resources, init syscall, then commands by const_name."""
    arg_by_const: dict[str, TypeExpr] = {
        tf.identifier: tf.arg_type for tf in type_findings
    }
    ret_by_const: dict[str, str] = {
        d.producer_syscall: d.resource_name for d in dependency_findings
    }

    syscalls = [_init_syscall(init)]
    const_names: list[str] = []
    for finding in sorted(identifier_findings, key=lambda f: f.const_name):
        const_names.append(finding.const_name)
        syscalls.append(
            _command_syscall(
                init,
                finding,
                arg_by_const.get(finding.const_name, FALLBACK_ARG_TYPE),
                ret_by_const.get(finding.const_name),
                source_handler,
            )
        )
    if init.kind == "socket":
        for name in (init.socket_domain, init.socket_type):
            if name and not name.isdigit():
                const_names.append(name)

    resources = [ResourceDecl(init.resource_name, "fd")]
    for dep in dependency_findings:
        resources.append(ResourceDecl(dep.resource_name, "fd"))

    spec = SpecFile(
        includes=_include_lines(const_names, db),
        resources=tuple(resources),
        flag_sets=(),
        types=tuple(type_defs),
        syscalls=tuple(syscalls),
    )
    return link_resources(spec)


def merge_specs(producer: SpecFile, consumer: SpecFile) -> SpecFile:
    """Fold a consumer handler's declarations into the producer's spec.

    Used when a dependency finding routes another handler's commands
    through a resource this spec produces. First declaration wins on
    name collisions.
    """
    includes = list(producer.includes)
    for inc in consumer.includes:
        if inc not in includes:
            includes.append(inc)
    resources = list(producer.resources)
    known_res = {r.name for r in resources}
    for r in consumer.resources:
        if r.name not in known_res:
            known_res.add(r.name)
            resources.append(r)
    types = list(producer.types)
    known_types = {t.name for t in types}
    for t in consumer.types:
        if t.name not in known_types:
            known_types.add(t.name)
            types.append(t)
    flag_sets = list(producer.flag_sets)
    known_flags = {f.name for f in flag_sets}
    for f in consumer.flag_sets:
        if f.name not in known_flags:
            known_flags.add(f.name)
            flag_sets.append(f)
    syscalls = list(producer.syscalls)
    known_calls = {s.full_name for s in syscalls}
    for s in consumer.syscalls:
        if s.full_name not in known_calls:
            known_calls.add(s.full_name)
            syscalls.append(s)
    merged = SpecFile(
        includes=tuple(sorted(includes)),
        resources=tuple(resources),
        flag_sets=tuple(flag_sets),
        types=tuple(types),
        syscalls=tuple(syscalls),
    )
    return link_resources(merged)
