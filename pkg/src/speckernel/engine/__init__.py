"""Model-driven analysis: prompts, backends, and the recursive driver."""

from .analysis import (
    DEFAULT_MAX_ITER,
    DEFAULT_UNKNOWN_CAP,
    AnalysisContext,
    analyze,
    merge_results,
)
from .backends import (
    AnalysisResponse,
    BackendConfig,
    BackendUnavailable,
    HttpBackend,
    MalformedResponse,
    QueryClient,
    RecordBackend,
    ReplayBackend,
    ReplayMiss,
    UnknownTarget,
    make_backend,
    parse_envelope,
    prompt_cache_key,
    query_backend,
)
from .prompts import (
    DEFAULT_PROMPT_BUDGET,
    TRUNCATION_MARKER,
    AssetMissing,
    Prompt,
    PromptAsset,
    Stage,
    gen_prompt,
    load_asset,
)

__all__ = [
    "DEFAULT_MAX_ITER",
    "DEFAULT_UNKNOWN_CAP",
    "AnalysisContext",
    "analyze",
    "merge_results",
    "AnalysisResponse",
    "BackendConfig",
    "BackendUnavailable",
    "HttpBackend",
    "MalformedResponse",
    "QueryClient",
    "RecordBackend",
    "ReplayBackend",
    "ReplayMiss",
    "UnknownTarget",
    "make_backend",
    "parse_envelope",
    "prompt_cache_key",
    "query_backend",
    "DEFAULT_PROMPT_BUDGET",
    "TRUNCATION_MARKER",
    "AssetMissing",
    "Prompt",
    "PromptAsset",
    "Stage",
    "gen_prompt",
    "load_asset",
]
