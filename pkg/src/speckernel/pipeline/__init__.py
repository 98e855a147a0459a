"""Stage orchestration: from handler registration to assembled spec."""

from .assemble import assemble_spec, merge_specs
from .runner import HandlerOutcome, process_handler, run_pipeline
from .stages import (
    FALLBACK_ARG_TYPE,
    IOCTL_TRIGGERS,
    SOCKOPT_TRIGGERS,
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

__all__ = [
    "FALLBACK_ARG_TYPE",
    "IOCTL_TRIGGERS",
    "SOCKOPT_TRIGGERS",
    "DependencyFinding",
    "HandlerInitSpec",
    "HandlerOutcome",
    "IdentifierFinding",
    "TypeFinding",
    "UnresolvedHandlerInit",
    "analyze_dependencies",
    "assemble_spec",
    "deduce_identifiers",
    "infer_handler_init",
    "merge_specs",
    "process_handler",
    "recover_types",
    "run_pipeline",
    "sanitize_variant",
]
