"""Validate, repair, and prune an assembled spec until it is clean.

Each errored declaration gets its own repair query (current text, the
validator messages, and the originating C source). Declarations still
failing after max_rounds are pruned together with everything that only
they support, so the loop always ends at zero errors.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from speckernel.engine import AnalysisContext, MalformedResponse, Stage, analyze, gen_prompt
from speckernel.indexer import DefinitionDatabase, extract_code
from speckernel.syzlang import (
    DEFAULT_BUILTIN_RESOURCES,
    SpecFile,
    SyzlangSyntaxError,
    ValidationError,
    link_resources,
    parse_spec,
    render_spec_with_map,
    validate_spec,
)
from speckernel.syzlang.ast import NamedType, StructDef, SyscallDesc, walk_type

DEFAULT_MAX_ROUNDS = 3
# new types a repair run may introduce in total (one per round at most)
_MAX_ADDED_TYPES = 8
# sweeps before the loop stops querying and prunes whatever still errors
_MAX_SWEEPS = 40


class Unrepairable(Exception):
    def __init__(self, target: str):
        self.target = target
        super().__init__(f"{target}: still invalid after the allowed repair rounds")


@dataclass(frozen=True)
class RepairTask:
    target: str
    current_text: str
    errors: tuple[ValidationError, ...]
    related_code: tuple[str, ...]
    round: int


@dataclass(frozen=True)
class RepairReport:
    fixed: tuple[tuple[str, int], ...]  # (target, rounds used)
    pruned: tuple[tuple[str, tuple[ValidationError, ...]], ...]
    final_error_count: int
    pruned_texts: tuple[str, ...] = ()  # archived verbatim by the caller

    def to_dict(self) -> dict:
        return {
            "fixed": [[t, r] for t, r in self.fixed],
            "pruned": [
                [t, [e.to_dict() for e in errs]] for t, errs in self.pruned
            ],
            "final_error_count": self.final_error_count,
        }


def match_errors(
    spec: SpecFile, errors: list[ValidationError]
) -> dict[str, list[ValidationError]]:
    """Group validator output by the declaration to repair.

    Errors already carry their declaration name; syntax errors carry only
    a line, which is mapped to the nearest enclosing declaration in the
    canonical rendering.
    """
    _, spans = render_spec_with_map(spec)
    out: dict[str, list[ValidationError]] = {}
    for e in errors:
        target = e.target
        if not target:
            target = _span_for_line(spans, e.location[1])
        out.setdefault(target, []).append(e)
    return out


def _span_for_line(spans, line: int) -> str:
    best = ""
    best_distance = None
    for s in spans:
        if s.start_line <= line <= s.end_line:
            return s.name
        distance = min(abs(s.start_line - line), abs(s.end_line - line))
        if best_distance is None or distance < best_distance:
            best_distance = distance
            best = s.name
    return best


def _decl_kind(spec: SpecFile, target: str) -> str | None:
    if any(s.full_name == target for s in spec.syscalls):
        return "syscall"
    if any(t.name == target for t in spec.types):
        return "type"
    if any(r.name == target for r in spec.resources):
        return "resource"
    if any(f.name == target for f in spec.flag_sets):
        return "flags"
    return None


def _decl_text(spec: SpecFile, target: str, kind: str) -> str:
    text, spans = render_spec_with_map(spec)
    lines = text.splitlines()
    for s in spans:
        if s.kind == kind and s.name == target:
            return "\n".join(lines[s.start_line - 1 : s.end_line])
    return ""


def _related_code(db: DefinitionDatabase, spec: SpecFile, target: str) -> tuple[str, ...]:
    names = []
    base = target.split("$", 1)[0]
    for sc in spec.syscalls:
        if sc.full_name == target and sc.identifier_const:
            names.append(sc.identifier_const)
    if base != target:
        names.append(base)
    names.append(target)
    out: list[str] = []
    for name in names:
        for d in extract_code(db, name)[:2]:
            if d.text not in out:
                out.append(d.text)
    return tuple(out[:3])


def repair_description(
    task: RepairTask,
    ctx: AnalysisContext,
    *,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> SpecFile | None:
    """One repair query; returns the parsed replacement fragment.

    A reply may flag at most one unknown type, which gets a single
    type-definition query; anything unusable returns None and the round
    is spent.
    """
    if task.round > max_rounds:
        raise Unrepairable(task.target)
    error_lines = [f"{e.code.value}: {e.message}" for e in task.errors]
    prompt = gen_prompt(
        Stage.REPAIR,
        [task.current_text, *task.related_code],
        error_lines,
        budget=ctx.prompt_budget,
    )
    try:
        resp = ctx.client.query(prompt)
    except MalformedResponse as e:
        ctx.note(f"repair: malformed reply for {task.target}: {e.detail}")
        return None
    text = resp.result.get("replacement")
    if not isinstance(text, str) or not text.strip():
        ctx.note(f"repair: no replacement text for {task.target}")
        return None
    try:
        frag = parse_spec(text)
    except SyzlangSyntaxError as e:
        ctx.note(f"repair: replacement for {task.target} does not parse ({e})")
        return None

    for u in resp.unknowns:
        if u.kind != "Type":
            continue
        defs = [
            d
            for d in extract_code(ctx.db, u.identifier)
            if d.kind in ("struct", "union", "enum")
        ]
        if defs:
            one_shot = dataclasses.replace(ctx, max_iter=1)
            result = analyze(
                [d.text for d in defs],
                [u.usage_info or f"definition requested for {u.identifier}"],
                1,
                Stage.TYPE_DEFINITION,
                one_shot,
            )
            frag = _merge_definitions(frag, result)
        break  # at most one nested query per round
    return frag


def _merge_definitions(frag: SpecFile, result: dict) -> SpecFile:
    types = list(frag.types)
    known = {t.name for t in types}
    for entry in result.get("definitions", []):
        if not isinstance(entry, dict):
            continue
        try:
            sub = parse_spec(str(entry.get("text", "")))
        except SyzlangSyntaxError:
            continue
        for t in sub.types:
            if t.name not in known:
                known.add(t.name)
                types.append(t)
    return dataclasses.replace(frag, types=tuple(types))


def _substitute(
    spec: SpecFile,
    target: str,
    kind: str,
    frag: SpecFile,
    allow_new_type: bool,
) -> tuple[SpecFile, int]:
    """Swap the repaired declaration in; returns (spec, new types added)."""
    types = list(spec.types)
    syscalls = list(spec.syscalls)
    resources = list(spec.resources)
    flag_sets = list(spec.flag_sets)
    changed = False

    if kind == "syscall":
        repl = next((s for s in frag.syscalls if s.full_name == target), None)
        if repl is None and len(frag.syscalls) == 1:
            repl = frag.syscalls[0]
        if repl is not None:
            syscalls = [repl if s.full_name == target else s for s in syscalls]
            changed = True
    elif kind == "type":
        repl = next((t for t in frag.types if t.name == target), None)
        if repl is not None:
            types = [repl if t.name == target else t for t in types]
            changed = True
    elif kind == "resource":
        repl = next((r for r in frag.resources if r.name == target), None)
        if repl is not None:
            resources = [repl if r.name == target else r for r in resources]
            changed = True
        known_calls = {s.full_name for s in syscalls}
        for s in frag.syscalls:
            if s.full_name in known_calls:
                syscalls = [s if x.full_name == s.full_name else x for x in syscalls]
                changed = True
    elif kind == "flags":
        repl = next((f for f in frag.flag_sets if f.name == target), None)
        if repl is not None:
            flag_sets = [repl if f.name == target else f for f in flag_sets]
            changed = True

    added = 0
    known_types = {t.name for t in types}
    for t in frag.types:
        if t.name != target and t.name not in known_types:
            if allow_new_type and added == 0:
                known_types.add(t.name)
                types.append(t)
                added = 1
                changed = True
    known_flags = {f.name for f in flag_sets}
    for f in frag.flag_sets:
        if f.name != target and f.name not in known_flags:
            known_flags.add(f.name)
            flag_sets.append(f)
            changed = True

    if not changed:
        return spec, 0
    return (
        link_resources(
            dataclasses.replace(
                spec,
                types=tuple(types),
                syscalls=tuple(syscalls),
                resources=tuple(resources),
                flag_sets=tuple(flag_sets),
            )
        ),
        added,
    )


def _references_name(sc: SyscallDesc, name: str) -> bool:
    if sc.ret == name:
        return True
    for _p, t in sc.params:
        for node in walk_type(t):
            if isinstance(node, NamedType) and node.name == name:
                return True
    return False


def _prune(spec: SpecFile, target: str, kind: str) -> tuple[SpecFile, list[str]]:
    """Remove the declaration plus the syscalls it alone supports."""
    removed: list[str] = []

    def grab(decl_kind: str, name: str):
        text = _decl_text(spec, name, decl_kind)
        if text:
            removed.append(text)

    types = list(spec.types)
    syscalls = list(spec.syscalls)
    resources = list(spec.resources)
    flag_sets = list(spec.flag_sets)

    if kind == "syscall":
        grab("syscall", target)
        syscalls = [s for s in syscalls if s.full_name != target]
    elif kind == "type":
        grab("type", target)
        types = [t for t in types if t.name != target]
        for s in list(syscalls):
            if _references_name(s, target):
                grab("syscall", s.full_name)
                syscalls = [x for x in syscalls if x.full_name != s.full_name]
    elif kind == "resource":
        grab("resource", target)
        resources = [r for r in resources if r.name != target]
        for s in list(syscalls):
            if _references_name(s, target):
                grab("syscall", s.full_name)
                syscalls = [x for x in syscalls if x.full_name != s.full_name]
    elif kind == "flags":
        grab("flags", target)
        flag_sets = [f for f in flag_sets if f.name != target]

    pruned = link_resources(
        dataclasses.replace(
            spec,
            types=tuple(types),
            syscalls=tuple(syscalls),
            resources=tuple(resources),
            flag_sets=tuple(flag_sets),
        )
    )
    return pruned, removed


def repair_spec(
    spec: SpecFile,
    db: DefinitionDatabase,
    ctx: AnalysisContext,
    *,
    path: str = "spec",
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    builtin_resources=DEFAULT_BUILTIN_RESOURCES,
    builtin_constants: dict | None = None,
) -> tuple[SpecFile, RepairReport]:
    """Drive validate-repair-substitute until the spec is clean."""
    current = link_resources(spec)
    attempts: dict[str, int] = {}
    pruned: list[tuple[str, tuple[ValidationError, ...]]] = []
    pruned_names: set[str] = set()
    pruned_texts: list[str] = []
    added_types = 0
    sweeps = 0
    prune_only = False

    def check(s: SpecFile) -> list[ValidationError]:
        return validate_spec(
            s,
            db,
            path=path,
            builtin_resources=builtin_resources,
            builtin_constants=builtin_constants,
        )

    while True:
        errors = check(current)
        if not errors:
            break
        sweeps += 1
        if sweeps > _MAX_SWEEPS:
            prune_only = True
        buckets = {t: v for t, v in match_errors(current, errors).items() if t}
        if not buckets:
            break  # nothing addressable (should not happen at AST level)
        candidates = [
            t
            for t in sorted(buckets)
            if not prune_only and attempts.get(t, 0) < max_rounds
        ]
        if not candidates:
            for t in sorted(buckets):
                kind = _decl_kind(current, t)
                if kind is None:
                    continue
                current, removed = _prune(current, t, kind)
                if t not in pruned_names:
                    pruned_names.add(t)
                    pruned.append((t, tuple(buckets[t])))
                pruned_texts.extend(x for x in removed if x not in pruned_texts)
            continue
        for t in candidates:
            kind = _decl_kind(current, t)
            if kind is None:
                continue
            attempts[t] = attempts.get(t, 0) + 1
            task = RepairTask(
                target=t,
                current_text=_decl_text(current, t, kind),
                errors=tuple(buckets[t]),
                related_code=_related_code(db, current, t),
                round=attempts[t],
            )
            frag = repair_description(task, ctx, max_rounds=max_rounds)
            if frag is None:
                continue
            current, added = _substitute(
                current, t, kind, frag, allow_new_type=added_types < _MAX_ADDED_TYPES
            )
            added_types += added

    fixed = tuple(
        (t, attempts[t]) for t in sorted(attempts) if t not in pruned_names
    )
    report = RepairReport(
        fixed=fixed,
        pruned=tuple(pruned),
        final_error_count=0,
        pruned_texts=tuple(pruned_texts),
    )
    return current, report
