"""Top-level C declaration recognition.

The scanner is lexical and structural: it walks the token stream of one
file, matches braces and parentheses, and classifies each top-level
declaration unit. There is no preprocessing and no type checking; both
branches of conditional-compilation blocks are scanned as-is. That is
enough to hand verbatim definition text to the analysis engine, which is
all downstream consumers need.

Recognized shapes:

* ``#define NAME ...`` directives, object-like and function-like.
* ``struct|union|enum NAME { ... }`` (optionally behind typedef/static/
  const qualifiers); ``typedef struct { ... } alias;`` takes the alias as
  the name.
* Function definitions: a top-level ``name ( ... ) { ... }`` where the
  brace block directly follows the parameter list.
* Initialized globals whose initializer is a brace block, e.g.
  ``static const struct file_operations fops = { ... };`` -- the shape
  operation-handler discovery feeds on.

Prototypes, extern declarations and scalar globals are deliberately not
indexed: they carry no body text worth analyzing.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _lexer

IDENT = _lexer.IDENT
PUNCT = _lexer.PUNCT
DIRECTIVE = _lexer.DIRECTIVE

KIND_FUNCTION = "function"
KIND_STRUCT = "struct"
KIND_UNION = "union"
KIND_ENUM = "enum"
KIND_MACRO = "macro"
KIND_GLOBALVAR = "globalvar"

_QUALIFIERS = {
    "static", "const", "extern", "inline", "__inline", "__inline__",
    "volatile", "register", "__always_inline", "__init", "__exit",
    "__read_mostly", "__maybe_unused", "__cold", "noinline",
}
_AGGREGATE = {"struct": KIND_STRUCT, "union": KIND_UNION, "enum": KIND_ENUM}


@dataclass(frozen=True)
class RawDefinition:
    """One recognized declaration before it is bound to a file path."""

    kind: str
    name: str
    start_line: int
    end_line: int
    text: str


def _macro_name(directive_text: str) -> str | None:
    body = directive_text.lstrip("#").lstrip()
    if not body.startswith("define"):
        return None
    rest = body[len("define"):].lstrip()
    name = []
    for ch in rest:
        if ch.isalnum() or ch == "_":
            name.append(ch)
        else:
            break
    return "".join(name) or None


def scan_text(text: str) -> list[RawDefinition]:
    """Scan one file's source and return its top-level definitions."""
    tokens = _lexer.tokenize(text)
    defs: list[RawDefinition] = []
    i = 0
    n = len(tokens)
    while i < n:
        kind, value, line, _off = tokens[i]
        if kind == DIRECTIVE:
            name = _macro_name(value)
            if name:
                end_line = line + value.count("\n")
                defs.append(RawDefinition(KIND_MACRO, name, line, end_line, value))
            i += 1
            continue
        if kind == PUNCT and value in ";,":
            i += 1
            continue
        decl_start = i
        i = _consume_declaration(tokens, i)
        d = _classify(text, tokens, decl_start, i)
        if d is not None:
            defs.append(d)
    return defs


def _consume_declaration(tokens, i: int) -> int:
    """Advance past one declaration unit; return the exclusive end index."""
    n = len(tokens)
    depth = 0
    saw_params = False  # a just-closed top-level paren group
    while i < n:
        kind, value, _line, _off = tokens[i]
        if kind == DIRECTIVE:
            i += 1
            continue
        if kind == PUNCT:
            if value in "([{":
                if value == "{" and depth == 0 and saw_params:
                    # function body: ends the declaration at its close
                    return _skip_group(tokens, i)
                depth += 1
                saw_params = False
            elif value in ")]}":
                depth -= 1
                if depth < 0:
                    # stray closer, skip it to make progress
                    return i + 1
                saw_params = depth == 0 and value == ")"
            elif value == ";" and depth == 0:
                return i + 1
            else:
                saw_params = False
        else:
            saw_params = False
        i += 1
    return i


def _skip_group(tokens, i: int) -> int:
    """From an opening bracket token, return the index past its match."""
    n = len(tokens)
    depth = 0
    while i < n:
        kind, value, _line, _off = tokens[i]
        if kind == PUNCT:
            if value in "([{":
                depth += 1
            elif value in ")]}":
                depth -= 1
                if depth == 0:
                    return i + 1
        i += 1
    return n


def _classify(text: str, tokens, start: int, end: int) -> RawDefinition | None:
    toks = [t for t in tokens[start:end] if t[0] != DIRECTIVE]
    if not toks:
        return None

    def slice_text(first, last):
        first_off = first[3]
        last_off = last[3] + len(last[1])
        return text[first_off:last_off]

    ends_with_brace = toks[-1][0] == PUNCT and toks[-1][1] == "}"
    ends_with_semi = toks[-1][0] == PUNCT and toks[-1][1] == ";"

    # initialized global with a brace-block initializer
    eq = _top_level_index(toks, "=")
    if eq is not None and ends_with_semi:
        if eq + 1 < len(toks) and toks[eq + 1][:2] == (PUNCT, "{"):
            name = _global_var_name(toks, eq)
            if name:
                return RawDefinition(
                    KIND_GLOBALVAR, name, toks[0][2], toks[-1][2],
                    slice_text(toks[0], toks[-1]),
                )
        return None

    # struct / union / enum definition: the brace must directly follow
    # the tag (or the tag's name). When it does not, the aggregate is a
    # return or parameter type and the unit falls through to the
    # function shape below.
    head = 0
    while head < len(toks) and toks[head][0] == IDENT and toks[head][1] in _QUALIFIERS | {"typedef"}:
        head += 1
    if head < len(toks) and toks[head][0] == IDENT and toks[head][1] in _AGGREGATE:
        agg_kind = _AGGREGATE[toks[head][1]]
        body = _top_level_index(toks, "{")
        named = body == head + 2 and toks[head + 1][0] == IDENT
        if body is not None and (named or body == head + 1):
            if not (ends_with_semi or ends_with_brace):
                return None
            name = None
            if named:
                name = toks[head + 1][1]
            elif ends_with_semi and len(toks) >= 2 and toks[-2][0] == IDENT:
                name = toks[-2][1]  # typedef alias
            if name:
                return RawDefinition(
                    agg_kind, name, toks[0][2], toks[-1][2],
                    slice_text(toks[0], toks[-1]),
                )
            return None

    # function definition: ...) { ... } with no top-level '='
    if ends_with_brace:
        name = _function_name(toks)
        if name:
            return RawDefinition(
                KIND_FUNCTION, name, toks[0][2], toks[-1][2],
                slice_text(toks[0], toks[-1]),
            )
    return None


def _top_level_index(toks, punct: str) -> int | None:
    depth = 0
    for idx, (kind, value, _line, _off) in enumerate(toks):
        if kind != PUNCT:
            continue
        if value in "([{":
            if value == punct and depth == 0:
                return idx
            depth += 1
        elif value in ")]}":
            depth -= 1
        elif value == punct and depth == 0:
            return idx
    return None


def _global_var_name(toks, eq: int) -> str | None:
    # name sits directly before '=', optionally behind array suffixes
    i = eq - 1
    while i >= 0 and toks[i][0] == PUNCT and toks[i][1] == "]":
        depth = 0
        while i >= 0:
            kind, value = toks[i][0], toks[i][1]
            if kind == PUNCT and value == "]":
                depth += 1
            elif kind == PUNCT and value == "[":
                depth -= 1
                if depth == 0:
                    break
            i -= 1
        i -= 1
    if i >= 0 and toks[i][0] == IDENT and toks[i][1] not in _AGGREGATE:
        return toks[i][1]
    return None


_ATTR_WORDS = {"__attribute__", "__acquires", "__releases", "__must_hold"}


def _function_name(toks) -> str | None:
    # find the body '{', walk back over the parameter list to the name
    depth = 0
    body = None
    for idx, (kind, value, _line, _off) in enumerate(toks):
        if kind != PUNCT:
            continue
        if value in "([{":
            if value == "{" and depth == 0:
                body = idx
                break
            depth += 1
        elif value in ")]}":
            depth -= 1
    if body is None:
        return None
    i = body - 1
    while i > 0:
        kind, value = toks[i][0], toks[i][1]
        if kind == PUNCT and value == ")":
            j = _match_back(toks, i)
            if j <= 0:
                return None
            prev_kind, prev_value = toks[j - 1][0], toks[j - 1][1]
            if prev_kind != IDENT:
                return None
            if prev_value in _ATTR_WORDS:
                i = j - 2  # skip the attribute group and its keyword
                continue
            if prev_value in _QUALIFIERS or prev_value in _AGGREGATE:
                return None
            return prev_value
        if kind == IDENT and (value in _QUALIFIERS or value in _ATTR_WORDS):
            i -= 1
            continue
        return None
    return None


def _match_back(toks, close: int) -> int:
    """Index of the '(' matching the ')' at ``close``; -1 if unbalanced."""
    depth = 0
    i = close
    while i >= 0:
        kind, value = toks[i][0], toks[i][1]
        if kind == PUNCT:
            if value == ")":
                depth += 1
            elif value == "(":
                depth -= 1
                if depth == 0:
                    return i
        i -= 1
    return -1
