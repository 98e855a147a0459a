"""Command-line surface: index, generate, validate, repair, run, report."""

from __future__ import annotations

import argparse
import json
import re
import shutil
import sys
from pathlib import Path

from speckernel.config import RunConfig, resolve_config
from speckernel.engine import AnalysisContext, BackendConfig, QueryClient
from speckernel.indexer import (
    DefinitionDatabase,
    IndexError_,
    SourceCorpus,
    find_operation_handlers,
    handlers_from_json,
    handlers_to_json,
    index_corpus,
    load_database,
    save_database,
)
from speckernel.pipeline import run_pipeline
from speckernel.repair import repair_spec
from speckernel.syzlang import ErrorCode, render_spec, validate_text


def _empty_database() -> DefinitionDatabase:
    return DefinitionDatabase(
        root_path=".", files=[], definitions={}, macros={}, file_index={}
    )


def _load_db(cfg: RunConfig, out_dir: Path, reindex: bool) -> DefinitionDatabase:
    defs_path = out_dir / "defs.json"
    if defs_path.is_file() and not reindex:
        return load_database(defs_path)
    corpus = SourceCorpus(
        root_path=Path(cfg.corpus_root), include_globs=tuple(cfg.include_globs)
    )
    db = index_corpus(corpus, skip_unreadable=cfg.skip_unreadable)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_database(db, defs_path)
    return db


def _filtered_handlers(db: DefinitionDatabase, cfg: RunConfig):
    handlers = find_operation_handlers(db)
    if cfg.handler_filter:
        pattern = re.compile(cfg.handler_filter)
        handlers = [h for h in handlers if pattern.search(h.struct_name)]
    return handlers


def _client_factory(backend_cfg: BackendConfig, out_dir: Path):
    if backend_cfg.cache_dir is None:
        from dataclasses import replace

        backend_cfg = replace(backend_cfg, cache_dir=str(out_dir / "cache"))

    def factory() -> QueryClient:
        return QueryClient(backend_cfg)

    return factory


def cmd_index(args) -> int:
    cfg = resolve_config(args)
    out_dir = Path(cfg.output_dir)
    try:
        corpus = SourceCorpus(
            root_path=Path(cfg.corpus_root), include_globs=tuple(cfg.include_globs)
        )
        db = index_corpus(corpus, skip_unreadable=cfg.skip_unreadable)
    except IndexError_ as e:
        print(f"index error: {e}", file=sys.stderr)
        return 2
    out_dir.mkdir(parents=True, exist_ok=True)
    save_database(db, out_dir / "defs.json")
    handlers = find_operation_handlers(db)
    (out_dir / "handlers.json").write_text(
        handlers_to_json(handlers), encoding="utf-8"
    )
    counts = db.counts()
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    print(f"indexed {len(db.files)} files: {summary}")
    print(f"handlers: {len(handlers)}")
    if db.warnings:
        print(f"warnings: {len(db.warnings)} unreadable file(s) skipped")
    return 0


def cmd_handlers(args) -> int:
    cfg = resolve_config(args)
    out_dir = Path(cfg.output_dir)
    handlers_path = out_dir / "handlers.json"
    if handlers_path.is_file():
        handlers = handlers_from_json(handlers_path.read_text(encoding="utf-8"))
    else:
        db = _load_db(cfg, out_dir, reindex=False)
        handlers = find_operation_handlers(db)
    if cfg.handler_filter:
        pattern = re.compile(cfg.handler_filter)
        handlers = [h for h in handlers if pattern.search(h.struct_name)]
    for h in handlers:
        ops = ", ".join(f"{k}={v}" for k, v in sorted(h.bound_ops.items()))
        print(f"{h.struct_name}\t{h.kind}\t{h.file}:{h.line}\t{ops}")
    print(f"total: {len(handlers)}")
    return 0


def _run_flow(args, do_repair: bool) -> int:
    cfg = resolve_config(args)
    out_dir = Path(cfg.output_dir)
    try:
        db = _load_db(cfg, out_dir, reindex=getattr(args, "reindex", False))
    except IndexError_ as e:
        print(f"index error: {e}", file=sys.stderr)
        return 2
    handlers = _filtered_handlers(db, cfg)
    (out_dir / "handlers.json").parent.mkdir(parents=True, exist_ok=True)
    (out_dir / "handlers.json").write_text(
        handlers_to_json(handlers), encoding="utf-8"
    )
    if not handlers:
        print("no handlers found")
        return 3
    if not cfg.resume:
        shutil.rmtree(out_dir / "state", ignore_errors=True)
    report = run_pipeline(
        db,
        handlers,
        _client_factory(cfg.backend, out_dir),
        out_dir,
        parallel=cfg.parallel,
        max_iter=cfg.max_iter,
        unknown_cap=cfg.unknown_cap,
        prompt_budget=cfg.prompt_budget,
        max_rounds=cfg.max_rounds,
        do_repair=do_repair,
    )
    totals = report["totals"]
    for name in sorted(report["handlers"]):
        entry = report["handlers"][name]
        line = f"{name}: {entry['status']}"
        if entry.get("spec"):
            line += f" -> {entry['spec']}"
        if entry.get("error"):
            line += f" ({entry['error']})"
        print(line)
    print(
        f"done: {totals['clean']} clean, {totals['skipped']} skipped, "
        f"{totals['failed']} failed, {totals['queries']} queries"
    )
    return 0 if totals["clean"] > 0 else 1


def cmd_generate(args) -> int:
    return _run_flow(args, do_repair=False)


def cmd_run(args) -> int:
    return _run_flow(args, do_repair=True)


def cmd_validate(args) -> int:
    db = load_database(Path(args.defs)) if args.defs else _empty_database()
    report: dict = {"files": {}, "errors": 0}
    syntax_failure = False
    for spec_path in args.specs:
        text = Path(spec_path).read_text(encoding="utf-8")
        _spec, errors = validate_text(text, db, path=spec_path)
        report["files"][spec_path] = [e.to_dict() for e in errors]
        report["errors"] += len(errors)
        if any(e.code is ErrorCode.SYNTAX_ERROR for e in errors):
            syntax_failure = True
    print(json.dumps(report, indent=2, sort_keys=True))
    if syntax_failure:
        return 2
    return 1 if report["errors"] else 0


def cmd_repair(args) -> int:
    cfg = resolve_config(args)
    db = load_database(Path(args.defs)) if args.defs else _empty_database()
    text = Path(args.spec).read_text(encoding="utf-8")
    from speckernel.syzlang import SyzlangSyntaxError, parse_spec

    try:
        spec = parse_spec(text)
    except SyzlangSyntaxError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    out_dir = Path(cfg.output_dir)
    client = _client_factory(cfg.backend, out_dir)()
    ctx = AnalysisContext(
        db=db,
        client=client,
        max_iter=cfg.max_iter,
        unknown_cap=cfg.unknown_cap,
        prompt_budget=cfg.prompt_budget,
    )
    repaired, rep = repair_spec(
        spec, db, ctx, path=args.spec, max_rounds=cfg.max_rounds
    )
    rendered = render_spec(repaired)
    if args.write:
        Path(args.spec).write_text(rendered, encoding="utf-8")
        print(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    else:
        sys.stdout.write(rendered)
        print(json.dumps(rep.to_dict(), indent=2, sort_keys=True), file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    cfg = resolve_config(args)
    path = Path(cfg.output_dir) / "report.json"
    if not path.is_file():
        print(f"no report at {path}", file=sys.stderr)
        return 2
    report = json.loads(path.read_text(encoding="utf-8"))
    for name in sorted(report.get("handlers", {})):
        entry = report["handlers"][name]
        counts = entry.get("counts", {})
        print(
            f"{name}: {entry['status']}"
            f" identifiers={counts.get('identifiers', 0)}"
            f" types={counts.get('types', 0)}"
            f" dependencies={counts.get('dependencies', 0)}"
            f" queries={entry.get('queries', 0)}"
        )
    totals = report.get("totals", {})
    print(
        f"totals: {totals.get('clean', 0)} clean, {totals.get('skipped', 0)} "
        f"skipped, {totals.get('failed', 0)} failed"
    )
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--corpus", help="kernel source tree root")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument(
        "--backend", choices=("http", "replay", "record"), help="model backend"
    )
    p.add_argument("--transcripts", help="transcript directory for replay/record")
    p.add_argument("--model", help="model name sent to the backend")
    p.add_argument("--temperature", type=float, help="sampling temperature")
    p.add_argument("--endpoint", help="HTTP backend endpoint URL")
    p.add_argument("--cache", help="prompt cache directory")
    p.add_argument("--max-iter", type=int, dest="max_iter", help="analysis depth cap")
    p.add_argument(
        "--max-rounds", type=int, dest="max_rounds", help="repair rounds per target"
    )
    p.add_argument("--handlers", help="regex filter over handler struct names")
    p.add_argument("--parallel", type=int, help="worker pool size")
    p.add_argument(
        "--resume", action="store_true", help="reuse per-handler stage state"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="speckernel",
        description="Synthesize syscall descriptions for kernel drivers and sockets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="index a source tree")
    _add_common(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("handlers", help="list discovered operation handlers")
    _add_common(p)
    p.set_defaults(func=cmd_handlers)

    p = sub.add_parser("generate", help="run analysis stages and emit raw specs")
    _add_common(p)
    p.add_argument("--reindex", action="store_true", help="ignore cached defs.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="validate spec files")
    p.add_argument("specs", nargs="+", help="spec files to check")
    p.add_argument("--defs", help="defs.json for constant lookups")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("repair", help="repair one spec file")
    p.add_argument("spec", help="spec file to repair")
    p.add_argument("--defs", help="defs.json for constant lookups")
    p.add_argument(
        "--write", action="store_true", help="rewrite the file in place"
    )
    _add_common(p)
    p.set_defaults(func=cmd_repair)

    p = sub.add_parser("run", help="index, generate, validate, and repair")
    _add_common(p)
    p.add_argument("--reindex", action="store_true", help="ignore cached defs.json")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="summarize out/report.json")
    _add_common(p)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
