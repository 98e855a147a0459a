"""Per-handler pipeline driver with stage persistence and a work pool.

Each handler runs its stages sequentially, saving stage output to
state/<handler>.json after every step so an interrupted run resumes
without re-querying. All artifact writes happen on the coordinating
thread after the pool drains, keeping the output tree deterministic
regardless of worker scheduling.
"""

from __future__ import annotations

import concurrent.futures
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from speckernel.engine import AnalysisContext, QueryClient
from speckernel.indexer import DefinitionDatabase, HandlerRegistration
from speckernel.pipeline.assemble import assemble_spec, merge_specs
from speckernel.pipeline.stages import (
    DependencyFinding,
    HandlerInitSpec,
    IdentifierFinding,
    TypeFinding,
    UnresolvedHandlerInit,
    analyze_dependencies,
    deduce_identifiers,
    infer_handler_init,
    recover_types,
    sanitize_variant,
)
from speckernel.repair import repair_spec
from speckernel.syzlang import (
    SpecFile,
    parse_spec,
    parse_type,
    render_const_file,
    render_spec,
    render_type,
    resolve_constants,
)

STATE_SCHEMA = 1
# how many producer->consumer hops may be folded into one spec
MAX_ABSORB_DEPTH = 3


@dataclass
class HandlerOutcome:
    handler: str
    status: str  # clean | skipped | failed
    spec: SpecFile | None = None
    spec_name: str | None = None
    counts: dict = field(default_factory=dict)
    stages: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)
    queries: int = 0
    error: str | None = None
    repair: dict | None = None
    pruned_texts: tuple = ()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_state(path: Path) -> dict:
    if not path.is_file():
        return {}
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return {}
    if doc.get("schema") != STATE_SCHEMA:
        return {}
    return doc


def _save_state(path: Path, state: dict) -> None:
    state["schema"] = STATE_SCHEMA
    _atomic_write(path, json.dumps(state, indent=2, sort_keys=True) + "\n")


def _types_to_state(type_findings, type_defs) -> dict:
    return {
        "findings": [
            {
                "identifier": tf.identifier,
                "arg_type": render_type(tf.arg_type),
                "fell_back": tf.fell_back,
            }
            for tf in type_findings
        ],
        "defs": render_spec(
            SpecFile(types=tuple(type_defs))
        ),
    }


def _types_from_state(doc: dict):
    findings = [
        TypeFinding(
            identifier=e["identifier"],
            arg_type=parse_type(e["arg_type"]),
            fell_back=bool(e.get("fell_back", False)),
        )
        for e in doc.get("findings", [])
    ]
    defs = list(parse_spec(doc.get("defs", "")).types)
    return findings, defs


def _run_stages(
    reg: HandlerRegistration,
    init: HandlerInitSpec,
    ctx: AnalysisContext,
    state: dict,
    state_path: Path,
    prefix: str,
    known_handlers: tuple[str, ...],
):
    """Identifier, type, and dependency stages with persistence."""
    key = lambda name: f"{prefix}{name}"

    if key("identifiers") in state:
        findings = [
            IdentifierFinding.from_dict(d) for d in state[key("identifiers")]
        ]
        return_relevant = list(state.get(key("return_relevant"), []))
    else:
        findings, return_relevant = deduce_identifiers(reg, init, ctx)
        state[key("identifiers")] = [f.to_dict() for f in findings]
        state[key("return_relevant")] = return_relevant
        _save_state(state_path, state)

    if key("types") in state:
        type_findings, type_defs = _types_from_state(state[key("types")])
    else:
        type_findings, type_defs = recover_types(findings, ctx)
        state[key("types")] = _types_to_state(type_findings, type_defs)
        _save_state(state_path, state)

    if key("dependencies") in state:
        deps = [DependencyFinding.from_dict(d) for d in state[key("dependencies")]]
    else:
        deps = analyze_dependencies(
            reg, init, findings, return_relevant, ctx, known_handlers
        )
        state[key("dependencies")] = [d.to_dict() for d in deps]
        _save_state(state_path, state)

    return findings, return_relevant, type_findings, type_defs, deps


def _absorb_consumers(
    spec: SpecFile,
    deps: list[DependencyFinding],
    registry: dict[str, HandlerRegistration],
    ctx: AnalysisContext,
    state: dict,
    state_path: Path,
    known_handlers: tuple[str, ...],
    absorbed: set[str],
    depth: int,
) -> SpecFile:
    """Fold each consumer handler's commands into the producer's spec."""
    if depth > MAX_ABSORB_DEPTH:
        return spec
    for dep in deps:
        for consumer in dep.consumer_handlers:
            if consumer in absorbed:
                continue
            reg = registry.get(consumer)
            if reg is None:
                ctx.note(
                    f"dependency: consumer handler {consumer!r} is not in the index"
                )
                continue
            absorbed.add(consumer)
            # commands of the consumer take the produced resource as fd
            sub_init = HandlerInitSpec(
                kind="driver",
                resource_name=dep.resource_name,
                variant=sanitize_variant(dep.resource_name.removeprefix("fd_")),
                init_syscall="openat",
                device_path=None,
            )
            findings, _rr, type_findings, type_defs, sub_deps = _run_stages(
                reg,
                sub_init,
                ctx,
                state,
                state_path,
                prefix=f"absorbed.{consumer}.",
                known_handlers=known_handlers,
            )
            consumer_spec = assemble_spec(
                sub_init,
                findings,
                type_findings,
                type_defs,
                sub_deps,
                db=ctx.db,
                source_handler=consumer,
            )
            # drop the synthetic init: the producing ioctl opens this resource
            consumer_spec = SpecFile(
                includes=consumer_spec.includes,
                resources=tuple(
                    r
                    for r in consumer_spec.resources
                    if r.name != dep.resource_name
                ),
                flag_sets=consumer_spec.flag_sets,
                types=consumer_spec.types,
                syscalls=tuple(
                    s
                    for s in consumer_spec.syscalls
                    if s.ret != dep.resource_name or s.base_name not in
                    ("openat", "syz_open_dev", "socket")
                ),
            )
            spec = merge_specs(spec, consumer_spec)
            spec = _absorb_consumers(
                spec,
                sub_deps,
                registry,
                ctx,
                state,
                state_path,
                known_handlers,
                absorbed,
                depth + 1,
            )
    return spec


def process_handler(
    reg: HandlerRegistration,
    db: DefinitionDatabase,
    client: QueryClient,
    registry: dict[str, HandlerRegistration],
    state_dir: Path,
    *,
    max_iter: int = 5,
    unknown_cap: int = 8,
    prompt_budget: int = 24000,
    max_rounds: int = 3,
    builtin_constants: dict | None = None,
    do_repair: bool = True,
) -> HandlerOutcome:
    """All stages, assembly, absorption, and repair for one handler."""
    ctx = AnalysisContext(
        db=db,
        client=client,
        max_iter=max_iter,
        unknown_cap=unknown_cap,
        prompt_budget=prompt_budget,
    )
    outcome = HandlerOutcome(handler=reg.struct_name, status="failed")
    state_path = state_dir / f"{reg.struct_name}.json"
    state = _load_state(state_path)
    known_handlers = tuple(sorted(registry))

    try:
        if "handler_init" in state:
            doc = state["handler_init"]
            if not doc.get("ok"):
                outcome.status = "skipped"
                outcome.error = doc.get("error", "handler init unresolved")
                outcome.queries = client.query_count
                return outcome
            init = HandlerInitSpec.from_dict(doc["init"])
        else:
            try:
                init = infer_handler_init(reg, ctx)
            except UnresolvedHandlerInit as e:
                state["handler_init"] = {"ok": False, "error": str(e)}
                _save_state(state_path, state)
                outcome.status = "skipped"
                outcome.error = str(e)
                outcome.unresolved = list(ctx.notes)
                outcome.queries = client.query_count
                return outcome
            state["handler_init"] = {"ok": True, "init": init.to_dict()}
            _save_state(state_path, state)
        outcome.stages.append("handler_init")

        findings, return_relevant, type_findings, type_defs, deps = _run_stages(
            reg, init, ctx, state, state_path, prefix="", known_handlers=known_handlers
        )
        outcome.stages.extend(["identifier_deduction", "type_recovery", "dependency_analysis"])

        spec = assemble_spec(
            init,
            findings,
            type_findings,
            type_defs,
            deps,
            db=db,
            source_handler=reg.struct_name,
        )
        spec = _absorb_consumers(
            spec,
            deps,
            registry,
            ctx,
            state,
            state_path,
            known_handlers,
            absorbed={reg.struct_name},
            depth=1,
        )
        outcome.stages.append("assemble")

        if do_repair:
            repaired, report = repair_spec(
                spec,
                db,
                ctx,
                path=f"{init.variant}.txt",
                max_rounds=max_rounds,
                builtin_constants=builtin_constants,
            )
            outcome.stages.append("repair")
            outcome.repair = report.to_dict()
            outcome.pruned_texts = report.pruned_texts
        else:
            repaired = spec

        outcome.counts = {
            "identifiers": len(findings),
            "types": len(repaired.types),
            "dependencies": len(deps),
        }
        outcome.unresolved = list(ctx.notes)
        outcome.queries = client.query_count
        if repaired.syscalls:
            outcome.status = "clean" if do_repair else "generated"
            outcome.spec = repaired
            outcome.spec_name = init.variant
        else:
            outcome.status = "failed"
            outcome.error = "every description was pruned during repair"
        return outcome
    except Exception as e:  # per-handler isolation: one failure never stops the run
        outcome.status = "failed"
        outcome.error = f"{type(e).__name__}: {e}"
        outcome.unresolved = list(ctx.notes)
        outcome.queries = client.query_count
        return outcome


def run_pipeline(
    db: DefinitionDatabase,
    handlers: list[HandlerRegistration],
    client_factory: Callable[[], QueryClient],
    out_dir: Path,
    *,
    parallel: int = 1,
    max_iter: int = 5,
    unknown_cap: int = 8,
    prompt_budget: int = 24000,
    max_rounds: int = 3,
    builtin_constants: dict | None = None,
    do_repair: bool = True,
) -> dict:
    """Process every handler and write specs, state, and the report."""
    out_dir = Path(out_dir)
    state_dir = out_dir / "state"
    state_dir.mkdir(parents=True, exist_ok=True)
    registry = {h.struct_name: h for h in handlers}

    def work(reg: HandlerRegistration) -> HandlerOutcome:
        return process_handler(
            reg,
            db,
            client_factory(),
            registry,
            state_dir,
            max_iter=max_iter,
            unknown_cap=unknown_cap,
            prompt_budget=prompt_budget,
            max_rounds=max_rounds,
            builtin_constants=builtin_constants,
            do_repair=do_repair,
        )

    ordered = sorted(handlers, key=lambda h: h.struct_name)
    if parallel <= 1 or len(ordered) <= 1:
        outcomes = [work(h) for h in ordered]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(work, ordered))

    # artifact writes happen only here, in sorted order
    report: dict = {"schema": 1, "handlers": {}, "repair": {}}
    used_names: set[str] = set()
    clean = skipped = failed = 0
    total_queries = 0
    for oc in outcomes:
        total_queries += oc.queries
        entry = {
            "status": oc.status,
            "stages": oc.stages,
            "counts": oc.counts,
            "unresolved": oc.unresolved,
            "queries": oc.queries,
        }
        if oc.error:
            entry["error"] = oc.error
        if oc.status in ("clean", "generated"):
            clean += 1
            name = oc.spec_name or sanitize_variant(oc.handler)
            if name in used_names:
                entry["collision"] = name
                name = f"{name}__{sanitize_variant(oc.handler)}"
            used_names.add(name)
            entry["spec"] = f"specs/{name}.txt"
            spec_with_consts, const_errors = resolve_constants(
                oc.spec, db, builtin_constants
            )
            _atomic_write(out_dir / "specs" / f"{name}.txt", render_spec(oc.spec))
            _atomic_write(
                out_dir / "specs" / f"{name}.const",
                render_const_file(spec_with_consts),
            )
            if const_errors:
                entry["const_errors"] = [e.to_dict() for e in const_errors]
            if oc.pruned_texts:
                _atomic_write(
                    out_dir / "pruned" / f"{name}.txt",
                    "\n\n".join(oc.pruned_texts) + "\n",
                )
                entry["pruned_file"] = f"pruned/{name}.txt"
        elif oc.status == "skipped":
            skipped += 1
        else:
            failed += 1
        report["handlers"][oc.handler] = entry
        if oc.repair is not None:
            report["repair"][oc.handler] = oc.repair

    report["totals"] = {
        "handlers": len(outcomes),
        "clean": clean,
        "skipped": skipped,
        "failed": failed,
        "queries": total_queries,
    }
    _atomic_write(
        out_dir / "report.json", json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    return report
