# cython: language_level=3
"""Compiled C tokenizer.

Cython twin of `speckernel.indexer._tokenizer`. Same token stream, same
tuple layout; only the inner loop is typed for speed. Keep the two in
lockstep: the test suite diffs their output token by token.
"""

IDENT = 1
NUMBER = 2
STRING = 3
CHARLIT = 4
PUNCT = 5
DIRECTIVE = 6


cdef inline bint _is_id_start(Py_UCS4 c):
    return (u"a" <= c <= u"z") or (u"A" <= c <= u"Z") or c == u"_"


cdef inline bint _is_id_cont(Py_UCS4 c):
    return _is_id_start(c) or (u"0" <= c <= u"9")


cdef inline bint _is_digit(Py_UCS4 c):
    return u"0" <= c <= u"9"


def tokenize(str text):
    """Lex C source into a list of (kind, value, line, offset) tuples."""
    cdef list tokens = []
    cdef Py_ssize_t n = len(text)
    cdef Py_ssize_t i = 0, j, start, end
    cdef int line = 1, start_line
    cdef bint at_line_start = True
    cdef Py_UCS4 c, d, nxt, quote
    while i < n:
        c = text[i]
        if c == u"\n":
            line += 1
            i += 1
            at_line_start = True
            continue
        if c == u" " or c == u"\t" or c == u"\r" or c == u"\f" or c == u"\v":
            i += 1
            continue
        if c == u"/" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == u"/":
                j = text.find(u"\n", i)
                i = n if j < 0 else j
                continue
            if nxt == u"*":
                j = text.find(u"*/", i + 2)
                end = n if j < 0 else j + 2
                line += text.count(u"\n", i, end)
                i = end
                # a comment does not begin a line for directive purposes
                continue
        if c == u"#" and at_line_start:
            start = i
            start_line = line
            while i < n:
                j = text.find(u"\n", i)
                if j < 0:
                    i = n
                    break
                # backslash-newline extends the directive
                if j > 0 and text[j - 1] == u"\\":
                    line += 1
                    i = j + 1
                    continue
                i = j
                break
            tokens.append((DIRECTIVE, text[start:i], start_line, start))
            continue
        at_line_start = False
        if _is_id_start(c):
            j = i + 1
            while j < n and _is_id_cont(text[j]):
                j += 1
            tokens.append((IDENT, text[i:j], line, i))
            i = j
            continue
        if _is_digit(c) or (c == u"." and i + 1 < n and _is_digit(text[i + 1])):
            j = i + 1
            while j < n:
                d = text[j]
                if _is_id_cont(d) or d == u".":
                    j += 1
                elif (d == u"+" or d == u"-") and (
                    text[j - 1] == u"e" or text[j - 1] == u"E"
                    or text[j - 1] == u"p" or text[j - 1] == u"P"
                ):
                    j += 1
                else:
                    break
            tokens.append((NUMBER, text[i:j], line, i))
            i = j
            continue
        if c == u'"' or c == u"'":
            quote = c
            start = i
            start_line = line
            j = i + 1
            while j < n:
                d = text[j]
                if d == u"\\":
                    if j + 1 < n and text[j + 1] == u"\n":
                        line += 1
                    j += 2
                    continue
                if d == u"\n":
                    line += 1
                if d == quote:
                    j += 1
                    break
                j += 1
            tokens.append(
                (STRING if quote == u'"' else CHARLIT, text[start:j], start_line, start)
            )
            i = j
            continue
        tokens.append((PUNCT, text[i:i + 1], line, i))
        i += 1
    return tokens
