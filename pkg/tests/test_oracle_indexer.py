"""Indexer equivalence against a naive line-oriented scanner.

The scanner below re-derives (kind, name) definition sets from scratch:
comment stripping, a brace-depth counter, and per-statement regexes.  It
shares no code with the real indexer, so agreement on every bundled
corpus is meaningful evidence rather than a tautology.
"""

import re
import time
from collections import Counter
from pathlib import Path

from speckernel.indexer import SourceCorpus, index_corpus

from conftest import CORPORA

_DEFINE_RE = re.compile(r"^\s*#\s*define\s+([A-Za-z_]\w*)")
_TAG_RE = re.compile(r"\b(struct|union|enum)\s+([A-Za-z_]\w*)\s*\{")
_INIT_RE = re.compile(r"\b([A-Za-z_]\w*)\s*(?:\[[^]]*\])?\s*=\s*\{")
_FUNC_RE = re.compile(r"\b([A-Za-z_]\w*)\s*\(")


def _strip_comments(text: str) -> str:
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == '"' or c == "'":
            j = i + 1
            while j < n and text[j] != c:
                j += 2 if text[j] == "\\" else 1
            out.append(text[i : min(j + 1, n)])
            i = j + 1
        elif c == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            i = n if j < 0 else j
        elif c == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            # keep the newlines so line structure survives
            end = n if j < 0 else j + 2
            out.append("\n" * text.count("\n", i, end))
            i = end
        else:
            out.append(c)
            i += 1
    return "".join(out)


def naive_scan(text: str) -> set[tuple[str, str]]:
    """(kind, name) pairs for every top-level definition in one file."""
    text = _strip_comments(text)
    found: set[tuple[str, str]] = set()
    depth = 0
    stmt = ""  # text of the current top-level statement so far
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        line = lines[i]
        i += 1
        if depth == 0:
            m = _DEFINE_RE.match(line)
            if m:
                found.add(("macro", m.group(1)))
                while line.rstrip().endswith("\\") and i < len(lines):
                    line = lines[i]
                    i += 1
                continue
            if line.lstrip().startswith("#"):
                continue
        for ch in line:
            if ch == "{":
                if depth == 0:
                    stmt += "{"
                    tag = _TAG_RE.search(stmt)
                    if tag:
                        found.add((tag.group(1), tag.group(2)))
                    elif _INIT_RE.search(stmt):
                        found.add(("globalvar", _INIT_RE.search(stmt).group(1)))
                    elif not stmt.lstrip().startswith("typedef"):
                        calls = _FUNC_RE.findall(stmt)
                        if calls:
                            found.add(("function", calls[0]))
                    stmt = ""
                depth += 1
            elif ch == "}":
                depth -= 1
            elif depth == 0:
                stmt += ch
        if depth == 0:
            stmt += " "
            if ";" in stmt:
                # declarations without bodies never define anything here
                stmt = stmt.rsplit(";", 1)[-1]
    return found


def oracle_sets(root: Path) -> set[tuple[str, str]]:
    pairs: set[tuple[str, str]] = set()
    for path in sorted(root.rglob("*")):
        if path.suffix not in (".c", ".h") or not path.is_file():
            continue
        try:
            text = path.read_text(encoding="utf-8")
        except UnicodeDecodeError:
            continue
        pairs |= naive_scan(text)
    return pairs


def indexed_sets(root: Path) -> set[tuple[str, str]]:
    db = index_corpus(SourceCorpus(root_path=root))
    return {(d.kind, name) for name, defs in db.definitions.items() for d in defs}


ALL_CORPORA = sorted(
    p.name for p in CORPORA.iterdir() if p.is_dir() and p.name != "badutf"
)


def test_oracle_agrees_on_every_corpus():
    for name in ALL_CORPORA:
        root = CORPORA / name
        got = indexed_sets(root)
        want = oracle_sets(root)
        assert got == want, (
            f"{name}: indexer and oracle disagree\n"
            f"only indexer: {sorted(got - want)}\n"
            f"only oracle:  {sorted(want - got)}"
        )


def test_oracle_corpus_pinned_counts():
    db = index_corpus(SourceCorpus(root_path=CORPORA / "oracle"))
    files = [f for f in db.files]
    kinds = Counter(d.kind for defs in db.definitions.values() for d in defs)
    assert len(files) == 3
    assert kinds["function"] == 5
    assert kinds["struct"] == 2
    assert kinds["enum"] == 1
    assert kinds["macro"] == 4


def test_full_fixture_tree_indexes_quickly():
    t0 = time.monotonic()
    for name in ALL_CORPORA:
        index_corpus(SourceCorpus(root_path=CORPORA / name))
    elapsed = time.monotonic() - t0
    assert elapsed < 2.0, f"indexing took {elapsed:.2f}s"
