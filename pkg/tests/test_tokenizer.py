"""Lexer unit tests plus compiled/pure twin equivalence."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speckernel.indexer import _lexer, _tokenizer
from speckernel.indexer._tokenizer import (
    CHARLIT,
    DIRECTIVE,
    IDENT,
    NUMBER,
    PUNCT,
    STRING,
    tokenize,
)

from conftest import CORPORA


def kinds(text):
    return [t[0] for t in tokenize(text)]


def values(text):
    return [t[1] for t in tokenize(text)]


def test_identifiers_and_punct():
    toks = tokenize("int foo_2(void *p);")
    assert [(k, v) for k, v, _l, _o in toks] == [
        (IDENT, "int"), (IDENT, "foo_2"), (PUNCT, "("), (IDENT, "void"),
        (PUNCT, "*"), (IDENT, "p"), (PUNCT, ")"), (PUNCT, ";"),
    ]


@pytest.mark.parametrize(
    "src",
    ["0", "42", "0x1F", "0755", "1UL", "0xffull", "3.14", ".5", "1e-9", "0x1p+4"],
)
def test_number_forms_single_token(src):
    toks = tokenize(src)
    assert toks == [(NUMBER, src, 1, 0)]


def test_string_and_char_literals():
    toks = tokenize('"a\\"b" + \'\\n\'')
    assert toks[0][:2] == (STRING, '"a\\"b"')
    assert toks[-1][:2] == (CHARLIT, "'\\n'")


def test_char_literal_with_escape():
    toks = tokenize(r"char c = '\'';")
    lits = [v for k, v, _l, _o in toks if k == CHARLIT]
    assert lits == [r"'\''"]


def test_comments_are_dropped():
    src = "a /* one\n two */ b // three\nc"
    assert values(src) == ["a", "b", "c"]
    assert [t[2] for t in tokenize(src)] == [1, 2, 3]


def test_unterminated_block_comment_swallows_rest():
    assert tokenize("x /* open") == [(IDENT, "x", 1, 0)]


def test_directive_is_one_token():
    src = "#define A 1\nint x;"
    toks = tokenize(src)
    assert toks[0] == (DIRECTIVE, "#define A 1", 1, 0)
    assert values(src)[1:] == ["int", "x", ";"]


def test_directive_continuation_lines():
    src = "#define BIG(x) \\\n\t((x) + 1)\nint y;"
    toks = tokenize(src)
    assert toks[0][0] == DIRECTIVE
    assert "((x) + 1)" in toks[0][1]
    # the identifier after the directive is on line 3
    assert toks[1] == (IDENT, "int", 3, toks[1][3])


def test_hash_mid_line_is_punct():
    toks = tokenize("a # b")
    assert [t[0] for t in toks] == [IDENT, PUNCT, IDENT]


def test_directive_after_leading_comment():
    toks = tokenize("/* c */ #define Z 9\n")
    assert toks[0][0] == DIRECTIVE


def test_offsets_slice_back_to_source():
    src = '#include <x.h>\nstatic char *s = "a\\nb"; /* k */ int n = 0x10;\n'
    for kind, value, _line, off in tokenize(src):
        assert src[off : off + len(value)] == value


def test_line_numbers_in_multiline_string():
    src = 'char *s = "one\\\ntwo";\nint z;'
    toks = tokenize(src)
    s = next(t for t in toks if t[0] == STRING)
    assert s[2] == 1
    z = next(t for t in toks if t[1] == "z")
    assert z[2] == 3


def test_backend_selected():
    assert _lexer.BACKEND in ("cython", "python")
    assert _lexer.tokenize("x")[0][:2] == (IDENT, "x")


needs_cython = pytest.mark.skipif(
    _lexer.BACKEND != "cython", reason="compiled tokenizer not built"
)


@needs_cython
def test_twins_agree_on_fixture_tree():
    count = 0
    for path in sorted(CORPORA.rglob("*")):
        if path.suffix not in (".c", ".h") or not path.is_file():
            continue
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError:
            continue
        assert _lexer.tokenize(text) == _tokenizer.tokenize(text), path
        count += 1
    assert count > 10


_c_ish = st.text(
    alphabet=st.sampled_from(
        list("abcXYZ_019 \t\n\\#/*\"'(){}[];,.+-<>=!&|^%~?:") + ["\u00e9", "\u2603"]
    ),
    max_size=200,
)


@needs_cython
@settings(max_examples=300, deadline=None)
@given(_c_ish)
def test_twins_agree_property(text):
    assert _lexer.tokenize(text) == _tokenizer.tokenize(text)


@settings(max_examples=200, deadline=None)
@given(_c_ish)
def test_tokens_anchor_to_source(text):
    prev_off = -1
    prev_line = 1
    for kind, value, line, off in _tokenizer.tokenize(text):
        assert kind in (IDENT, NUMBER, STRING, CHARLIT, PUNCT, DIRECTIVE)
        assert value
        assert text[off : off + len(value)] == value
        assert off > prev_off
        assert line >= prev_line
        prev_off, prev_line = off, line
