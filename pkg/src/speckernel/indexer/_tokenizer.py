"""Pure-Python C tokenizer.

Reference implementation of the lexer behind the definition indexer. A
Cython twin (`_ctokenizer.pyx`) compiles the same algorithm for large
codebases; `speckernel.indexer` picks whichever is importable. Both must
produce identical token streams, which the test suite asserts.

Tokens are `(kind, value, line, offset)` tuples where `value` is the exact
source substring, `line` is 1-based and `offset` is the character offset of
the token start. Comments and whitespace are dropped. Preprocessor
directives are emitted as single DIRECTIVE tokens covering backslash
continuations, so the scanner never has to re-discover logical lines.
"""

IDENT = 1
NUMBER = 2
STRING = 3
CHARLIT = 4
PUNCT = 5
DIRECTIVE = 6

_ID_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_ID_CONT = _ID_START | set("0123456789")
_DIGITS = set("0123456789")


def tokenize(text):
    """Lex C source into a list of (kind, value, line, offset) tuples."""
    tokens = []
    n = len(text)
    i = 0
    line = 1
    at_line_start = True
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            at_line_start = True
            continue
        if c in " \t\r\f\v":
            i += 1
            continue
        if c == "/" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == "/":
                j = text.find("\n", i)
                i = n if j < 0 else j
                continue
            if nxt == "*":
                j = text.find("*/", i + 2)
                end = n if j < 0 else j + 2
                line += text.count("\n", i, end)
                i = end
                # a comment does not begin a line for directive purposes
                continue
        if c == "#" and at_line_start:
            start, start_line = i, line
            while i < n:
                j = text.find("\n", i)
                if j < 0:
                    i = n
                    break
                # backslash-newline extends the directive
                if j > 0 and text[j - 1] == "\\":
                    line += 1
                    i = j + 1
                    continue
                i = j
                break
            tokens.append((DIRECTIVE, text[start:i], start_line, start))
            continue
        at_line_start = False
        if c in _ID_START:
            j = i + 1
            while j < n and text[j] in _ID_CONT:
                j += 1
            tokens.append((IDENT, text[i:j], line, i))
            i = j
            continue
        if c in _DIGITS or (c == "." and i + 1 < n and text[i + 1] in _DIGITS):
            j = i + 1
            while j < n:
                d = text[j]
                if d in _ID_CONT or d == ".":
                    j += 1
                elif d in "+-" and text[j - 1] in "eEpP":
                    j += 1
                else:
                    break
            tokens.append((NUMBER, text[i:j], line, i))
            i = j
            continue
        if c == '"' or c == "'":
            quote = c
            start, start_line = i, line
            j = i + 1
            while j < n:
                d = text[j]
                if d == "\\":
                    if j + 1 < n and text[j + 1] == "\n":
                        line += 1
                    j += 2
                    continue
                if d == "\n":
                    line += 1
                if d == quote:
                    j += 1
                    break
                j += 1
            tokens.append(
                (STRING if quote == '"' else CHARLIT, text[start:j], start_line, start)
            )
            i = j
            continue
        tokens.append((PUNCT, c, line, i))
        i += 1
    return tokens
