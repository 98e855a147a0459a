"""Prompt assembly from versioned asset files.

Each stage has an asset at assets/prompts/<stage>.md with three delimited
sections: SYSTEM (role and output contract), EXAMPLES (few-shot
input/output pairs), TEMPLATE (the task instruction). Rendering is
deterministic; oversized inputs are cut down longest-block-first until
the whole prompt fits the budget.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources as importlib_resources

# budget is measured in 4-character units, the usual token approximation
DEFAULT_PROMPT_BUDGET = 24000
TRUNCATION_MARKER = "... [truncated to fit the prompt budget]"

_MIN_BLOCK_CHARS = 200


class Stage(enum.Enum):
    HANDLER_INIT = "handler_init"
    IDENTIFIER_DEDUCTION = "identifier_deduction"
    TYPE_RECOVERY = "type_recovery"
    TYPE_DEFINITION = "type_definition"
    DEPENDENCY_ANALYSIS = "dependency_analysis"
    REPAIR = "repair"


class AssetMissing(Exception):
    def __init__(self, stage: Stage):
        self.stage = stage
        super().__init__(f"no prompt asset for stage {stage.value!r}")


@dataclass(frozen=True)
class PromptAsset:
    system_text: str
    few_shot_examples: tuple[tuple[str, str], ...]
    template: str


@dataclass(frozen=True)
class Prompt:
    stage: Stage
    system_text: str
    few_shot_examples: tuple[tuple[str, str], ...]
    related_code: tuple[str, ...]
    usage_info: tuple[str, ...]
    prior_findings: str | None
    text: str = field(compare=False, default="")


_SECTION_RE = re.compile(r"^## (SYSTEM|EXAMPLES|TEMPLATE)\s*$", re.MULTILINE)
_EXAMPLE_RE = re.compile(r"^### (INPUT|OUTPUT)\s*$", re.MULTILINE)

_asset_cache: dict[Stage, PromptAsset] = {}


def load_asset(stage: Stage) -> PromptAsset:
    if stage in _asset_cache:
        return _asset_cache[stage]
    ref = importlib_resources.files("speckernel").joinpath(
        "assets", "prompts", f"{stage.value}.md"
    )
    try:
        raw = ref.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError):
        raise AssetMissing(stage) from None
    asset = _parse_asset(raw, stage)
    _asset_cache[stage] = asset
    return asset


def _parse_asset(raw: str, stage: Stage) -> PromptAsset:
    sections: dict[str, str] = {}
    matches = list(_SECTION_RE.finditer(raw))
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
        sections[m.group(1)] = raw[m.end():end].strip()
    if "SYSTEM" not in sections or "TEMPLATE" not in sections:
        raise AssetMissing(stage)

    examples: list[tuple[str, str]] = []
    ex_text = sections.get("EXAMPLES", "")
    parts = list(_EXAMPLE_RE.finditer(ex_text))
    current_input = None
    for i, m in enumerate(parts):
        end = parts[i + 1].start() if i + 1 < len(parts) else len(ex_text)
        body = ex_text[m.end():end].strip()
        if m.group(1) == "INPUT":
            current_input = body
        elif current_input is not None:
            examples.append((current_input, body))
            current_input = None

    return PromptAsset(
        system_text=sections["SYSTEM"],
        few_shot_examples=tuple(examples),
        template=sections["TEMPLATE"],
    )


def _render(asset: PromptAsset, related_code, usage_info, prior_findings) -> str:
    parts = [asset.system_text, ""]
    for i, (ex_in, ex_out) in enumerate(asset.few_shot_examples, 1):
        parts.append(f"== EXAMPLE {i} INPUT ==")
        parts.append(ex_in)
        parts.append(f"== EXAMPLE {i} OUTPUT ==")
        parts.append(ex_out)
        parts.append("")
    parts.append("== RELATED CODE ==")
    if related_code:
        for block in related_code:
            parts.append(block)
            parts.append("")
    else:
        parts.append("(no code available)")
        parts.append("")
    if usage_info:
        parts.append("== USAGE ==")
        for snippet in usage_info:
            parts.append(snippet)
            parts.append("")
    if prior_findings:
        parts.append("== FINDINGS SO FAR ==")
        parts.append(prior_findings)
        parts.append("")
    parts.append("== TASK ==")
    parts.append(asset.template)
    return "\n".join(parts)


def gen_prompt(
    stage: Stage,
    related_code,
    usage_info,
    prior_findings: str | None = None,
    budget: int = DEFAULT_PROMPT_BUDGET,
) -> Prompt:
    """Build the stage prompt; raises AssetMissing if the asset is absent."""
    asset = load_asset(stage)
    code_blocks = [str(b) for b in related_code]
    usage_blocks = [str(u) for u in usage_info]
    limit_chars = budget * 4

    text = _render(asset, code_blocks, usage_blocks, prior_findings)
    floor = _MIN_BLOCK_CHARS + len(TRUNCATION_MARKER) + 1
    while len(text) > limit_chars:
        # shrink the longest block first; code before usage on ties
        candidates = [
            (len(b), 0, i) for i, b in enumerate(code_blocks) if len(b) > floor
        ] + [
            (len(b), 1, i) for i, b in enumerate(usage_blocks) if len(b) > floor
        ]
        if not candidates:
            text = text[: limit_chars - len(TRUNCATION_MARKER)] + TRUNCATION_MARKER
            break
        _size, which, idx = max(candidates, key=lambda c: (c[0], -c[1], -c[2]))
        blocks = code_blocks if which == 0 else usage_blocks
        keep = max(len(blocks[idx]) // 2, _MIN_BLOCK_CHARS)
        shrunk = blocks[idx][:keep] + "\n" + TRUNCATION_MARKER
        if len(shrunk) >= len(blocks[idx]):
            text = text[: limit_chars - len(TRUNCATION_MARKER)] + TRUNCATION_MARKER
            break
        blocks[idx] = shrunk
        text = _render(asset, code_blocks, usage_blocks, prior_findings)

    return Prompt(
        stage=stage,
        system_text=asset.system_text,
        few_shot_examples=asset.few_shot_examples,
        related_code=tuple(code_blocks),
        usage_info=tuple(usage_blocks),
        prior_findings=prior_findings,
        text=text,
    )
