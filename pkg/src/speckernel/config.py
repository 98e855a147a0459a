"""Run configuration: defaults, TOML file, then flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from speckernel.engine import BackendConfig
from speckernel.indexer import DEFAULT_INCLUDE_GLOBS


@dataclass(frozen=True)
class RunConfig:
    corpus_root: str = "."
    include_globs: tuple = tuple(DEFAULT_INCLUDE_GLOBS)
    skip_unreadable: bool = True
    backend: BackendConfig = field(default_factory=BackendConfig)
    max_iter: int = 5
    unknown_cap: int = 8
    prompt_budget: int = 24000
    max_rounds: int = 3
    parallel: int = 1
    output_dir: str = "out"
    handler_filter: str = ""
    resume: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.parallel < 1:
            raise ValueError("parallel must be at least 1")


def load_config_file(path: str | Path) -> dict:
    with open(path, "rb") as f:
        return tomllib.load(f)


def config_from_doc(doc: dict) -> RunConfig:
    corpus = doc.get("corpus", {})
    backend_doc = doc.get("backend", {})
    pipeline = doc.get("pipeline", {})
    output = doc.get("output", {})

    backend = BackendConfig(
        kind=backend_doc.get("kind", "replay"),
        endpoint_url=backend_doc.get("endpoint", ""),
        model_name=backend_doc.get("model", "default"),
        temperature=float(backend_doc.get("temperature", 0.1)),
        max_retries=int(backend_doc.get("max_retries", 3)),
        cache_dir=backend_doc.get("cache"),
        transcripts_dir=backend_doc.get("transcripts"),
        max_in_flight=int(backend_doc.get("max_in_flight", 4)),
        requests_per_second=float(backend_doc.get("requests_per_second", 0.0)),
    )
    return RunConfig(
        corpus_root=corpus.get("root", "."),
        include_globs=tuple(corpus.get("include", DEFAULT_INCLUDE_GLOBS)),
        skip_unreadable=bool(corpus.get("skip_unreadable", True)),
        backend=backend,
        max_iter=int(pipeline.get("max_iter", 5)),
        unknown_cap=int(pipeline.get("unknown_cap", 8)),
        prompt_budget=int(pipeline.get("prompt_budget", 24000)),
        max_rounds=int(pipeline.get("max_rounds", 3)),
        parallel=int(pipeline.get("parallel", 1)),
        output_dir=output.get("dir", "out"),
        handler_filter=doc.get("filter", {}).get("handlers", ""),
        resume=bool(pipeline.get("resume", False)),
    )


def apply_flags(cfg: RunConfig, args) -> RunConfig:
    """Overlay parsed argparse values; only flags the user gave win."""
    backend = cfg.backend
    if getattr(args, "backend", None):
        backend = replace(backend, kind=args.backend)
    if getattr(args, "transcripts", None):
        backend = replace(backend, transcripts_dir=args.transcripts)
    if getattr(args, "model", None):
        backend = replace(backend, model_name=args.model)
    if getattr(args, "temperature", None) is not None:
        backend = replace(backend, temperature=args.temperature)
    if getattr(args, "endpoint", None):
        backend = replace(backend, endpoint_url=args.endpoint)
    if getattr(args, "cache", None):
        backend = replace(backend, cache_dir=args.cache)

    updates: dict = {"backend": backend}
    if getattr(args, "corpus", None):
        updates["corpus_root"] = args.corpus
    if getattr(args, "out", None):
        updates["output_dir"] = args.out
    if getattr(args, "max_iter", None) is not None:
        updates["max_iter"] = args.max_iter
    if getattr(args, "handlers", None):
        updates["handler_filter"] = args.handlers
    if getattr(args, "parallel", None) is not None:
        updates["parallel"] = args.parallel
    if getattr(args, "resume", False):
        updates["resume"] = True
    if getattr(args, "max_rounds", None) is not None:
        updates["max_rounds"] = args.max_rounds
    return replace(cfg, **updates)


def resolve_config(args) -> RunConfig:
    if getattr(args, "config", None):
        cfg = config_from_doc(load_config_file(args.config))
    else:
        cfg = RunConfig()
    return apply_flags(cfg, args)
