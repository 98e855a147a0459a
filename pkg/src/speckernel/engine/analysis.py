"""Bounded recursive analysis over unknown targets.

The driver loop: prompt over the code at hand, parse the reply, then for
every unknown the model flagged, pull that identifier's source from the
index and recurse one step deeper, folding child findings into the
parent's. Recursion stops past max_iter (checked as `step > max_iter`,
so exactly max_iter levels run) and each identifier is analyzed at most
once per stage thanks to the visited set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from speckernel.indexer.database import DefinitionDatabase, extract_code

from .backends import MalformedResponse, QueryClient
from .prompts import DEFAULT_PROMPT_BUDGET, Stage, gen_prompt

DEFAULT_MAX_ITER = 5
DEFAULT_UNKNOWN_CAP = 8


@dataclass
class AnalysisContext:
    db: DefinitionDatabase
    client: QueryClient
    max_iter: int = DEFAULT_MAX_ITER
    unknown_cap: int = DEFAULT_UNKNOWN_CAP
    prompt_budget: int = DEFAULT_PROMPT_BUDGET
    visited: set = field(default_factory=set)
    notes: list = field(default_factory=list)

    def note(self, text: str):
        self.notes.append(text)


def merge_results(parent: dict, child: dict) -> dict:
    """Fold a child step's findings into the parent's.

    Lists concatenate with duplicates (by canonical JSON) dropped, nested
    dicts merge recursively, and on a scalar conflict the parent — the
    shallower, earlier finding — wins.
    """
    merged = dict(parent)
    for key, cv in child.items():
        if key not in merged:
            merged[key] = cv
            continue
        pv = merged[key]
        if isinstance(pv, list) and isinstance(cv, list):
            seen = {json.dumps(x, sort_keys=True) for x in pv}
            extended = list(pv)
            for x in cv:
                fingerprint = json.dumps(x, sort_keys=True)
                if fingerprint not in seen:
                    seen.add(fingerprint)
                    extended.append(x)
            merged[key] = extended
        elif isinstance(pv, dict) and isinstance(cv, dict):
            merged[key] = merge_results(pv, cv)
        # scalar vs scalar: parent wins, nothing to do
    return merged


def analyze(
    related_code,
    usage_info,
    step: int,
    stage: Stage,
    ctx: AnalysisContext,
    prior_findings: str | None = None,
) -> dict:
    """One stage of recursive analysis; returns the merged result dict."""
    if step < 1:
        raise ValueError("step starts at 1")
    if step > ctx.max_iter:
        return {}

    prompt = gen_prompt(
        stage, related_code, usage_info, prior_findings, budget=ctx.prompt_budget
    )
    try:
        response = ctx.client.query(prompt)
    except MalformedResponse:
        ctx.note(f"{stage.value}: malformed response at step {step}, contributing nothing")
        return {}

    result = dict(response.result)

    unknowns = response.unknowns
    if len(unknowns) > ctx.unknown_cap:
        for extra in unknowns[ctx.unknown_cap:]:
            ctx.note(
                f"{stage.value}: unknown {extra.identifier!r} beyond the fan-out cap, not followed"
            )
        unknowns = unknowns[: ctx.unknown_cap]

    for unknown in unknowns:
        if unknown.identifier in ctx.visited:
            continue
        ctx.visited.add(unknown.identifier)
        defs = extract_code(ctx.db, unknown.identifier)
        if not defs:
            ctx.note(
                f"{stage.value}: no definition found for {unknown.identifier!r}, skipped"
            )
            continue
        child = analyze(
            [d.text for d in defs],
            [unknown.usage_info] if unknown.usage_info else [],
            step + 1,
            stage,
            ctx,
            prior_findings=json.dumps(result, sort_keys=True),
        )
        result = merge_results(result, child)
    return result
