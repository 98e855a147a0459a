"""Definition database: indexing, queries, serialization.

`index_corpus` walks the matched files of a source tree and builds an
immutable, deterministically ordered map from identifier to definitions.
The database answers the two extraction requests the analysis engine
issues: `extract_code` (definition text by identifier) and `find_usages`
(non-definition token occurrences wrapped in snippet windows).
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import _lexer, scan

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_INCLUDE_GLOBS = ("**/*.c", "**/*.h")
DEFAULT_SNIPPET_RADIUS = 20


class IndexError_(Exception):
    """Raised for unreadable corpus files when skip_unreadable is off."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


@dataclass(frozen=True)
class SourceCorpus:
    root_path: Path
    include_globs: tuple[str, ...] = DEFAULT_INCLUDE_GLOBS
    exclude_globs: tuple[str, ...] = ()

    def matched_files(self) -> list[str]:
        """Relative posix paths of all files the globs select, sorted."""
        root = Path(self.root_path)
        if not root.is_dir():
            raise IndexError_(str(root), "not a directory")
        selected: set[str] = set()
        for pattern in self.include_globs:
            for p in root.glob(pattern):
                if p.is_file():
                    selected.add(p.relative_to(root).as_posix())
        for pattern in self.exclude_globs:
            selected -= {
                p.relative_to(root).as_posix()
                for p in root.glob(pattern)
                if p.is_file()
            }
        return sorted(selected)


@dataclass(frozen=True)
class Definition:
    kind: str  # scan.KIND_*
    name: str
    file: str  # posix path relative to the corpus root
    line_span: tuple[int, int]  # 1-based inclusive
    text: str

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "file": self.file,
            "line_span": list(self.line_span),
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Definition":
        return cls(d["kind"], d["name"], d["file"], tuple(d["line_span"]), d["text"])


@dataclass(frozen=True)
class UsageReference:
    identifier: str
    file: str
    line: int
    snippet: str

    def to_dict(self) -> dict:
        return {
            "identifier": self.identifier,
            "file": self.file,
            "line": self.line,
            "snippet": self.snippet,
        }


@dataclass
class DefinitionDatabase:
    """Immutable after construction; safe to share across readers."""

    root_path: str
    files: list[str]
    definitions: dict[str, list[Definition]]
    macros: dict[str, str]
    file_index: dict[str, list[Definition]]
    warnings: list[dict] = field(default_factory=list)
    snippet_radius: int = DEFAULT_SNIPPET_RADIUS
    _text_cache: dict[str, str] = field(default_factory=dict, repr=False)

    def read_file(self, rel_path: str) -> str:
        text = self._text_cache.get(rel_path)
        if text is None:
            text = _read_source(Path(self.root_path) / rel_path)
            self._text_cache[rel_path] = text
        return text

    def to_json(self) -> str:
        doc = {
            "schema": SCHEMA_VERSION,
            "root_path": self.root_path,
            "snippet_radius": self.snippet_radius,
            "files": self.files,
            "definitions": {
                name: [d.to_dict() for d in defs]
                for name, defs in sorted(self.definitions.items())
            },
            "macros": dict(sorted(self.macros.items())),
            "warnings": self.warnings,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DefinitionDatabase":
        doc = json.loads(text)
        if doc.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported defs.json schema: {doc.get('schema')!r}")
        definitions = {
            name: [Definition.from_dict(d) for d in defs]
            for name, defs in doc["definitions"].items()
        }
        file_index: dict[str, list[Definition]] = {}
        for defs in definitions.values():
            for d in defs:
                file_index.setdefault(d.file, []).append(d)
        for defs in file_index.values():
            defs.sort(key=lambda d: (d.line_span[0], d.name))
        return cls(
            root_path=doc["root_path"],
            files=list(doc["files"]),
            definitions=definitions,
            macros=dict(doc["macros"]),
            file_index=file_index,
            warnings=list(doc.get("warnings", ())),
            snippet_radius=int(doc.get("snippet_radius", DEFAULT_SNIPPET_RADIUS)),
        )

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for defs in self.definitions.values():
            for d in defs:
                out[d.kind] = out.get(d.kind, 0) + 1
        return out


def _read_source(path: Path) -> str:
    with open(path, "rb") as fh:
        raw = fh.read()
    return raw.decode("utf-8")


def index_corpus(
    corpus: SourceCorpus,
    *,
    skip_unreadable: bool = True,
    snippet_radius: int = DEFAULT_SNIPPET_RADIUS,
    parallelism: int = 1,
) -> DefinitionDatabase:
    """Index every matched file into a DefinitionDatabase.

    Unreadable files are skipped and recorded on the database unless
    skip_unreadable is False, in which case IndexError_ aborts the run.
    File results are merged in sorted path order, so the output is
    deterministic regardless of parallelism.
    """
    files = corpus.matched_files()
    root = Path(corpus.root_path)
    warnings: list[dict] = []
    texts: dict[str, str] = {}

    def load(rel: str):
        try:
            return rel, _read_source(root / rel), None
        except (OSError, UnicodeDecodeError) as exc:
            return rel, None, str(exc)

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(load, files))
    else:
        results = [load(rel) for rel in files]

    kept_files: list[str] = []
    for rel, text, err in results:
        if err is not None:
            if not skip_unreadable:
                raise IndexError_(rel, err)
            logger.warning("skipping unreadable file %s: %s", rel, err)
            warnings.append({"file": rel, "error": err})
            continue
        kept_files.append(rel)
        texts[rel] = text

    definitions: dict[str, list[Definition]] = {}
    macros: dict[str, str] = {}
    file_index: dict[str, list[Definition]] = {}
    for rel in kept_files:
        raw_defs = scan.scan_text(texts[rel])
        bound = [
            Definition(r.kind, r.name, rel, (r.start_line, r.end_line), r.text)
            for r in raw_defs
        ]
        file_index[rel] = sorted(bound, key=lambda d: (d.line_span[0], d.name))
        for d in bound:
            definitions.setdefault(d.name, []).append(d)
            if d.kind == scan.KIND_MACRO:
                # later definitions win, matching last-seen preprocessor state
                macros[d.name] = _macro_body(d.text)
    for defs in definitions.values():
        defs.sort(key=lambda d: (d.file, d.line_span[0]))

    db = DefinitionDatabase(
        root_path=str(corpus.root_path),
        files=kept_files,
        definitions=definitions,
        macros=macros,
        file_index=file_index,
        warnings=warnings,
        snippet_radius=snippet_radius,
    )
    db._text_cache.update(texts)
    return db


def _macro_body(directive_text: str) -> str:
    body = directive_text.lstrip("#").lstrip()
    body = body[len("define"):].lstrip()
    i = 0
    while i < len(body) and (body[i].isalnum() or body[i] == "_"):
        i += 1
    # a body starting with "(" (no space after the name) is function-like;
    # keep that leading paren so consumers can tell the two apart
    return body[i:].rstrip()


def extract_code(db: DefinitionDatabase, identifier: str) -> list[Definition]:
    """All definitions named `identifier`, ordered by (file, start line)."""
    if not identifier:
        raise ValueError("identifier must be non-empty")
    return list(db.definitions.get(identifier, ()))


def find_usages(
    db: DefinitionDatabase, identifier: str, radius: int | None = None
) -> list[UsageReference]:
    """Non-definition token occurrences of `identifier` with snippets.

    Occurrences inside the identifier's own definitions are excluded;
    occurrences inside other definitions (e.g. a handler struct referenced
    from a miscdevice initializer) are what make this useful.
    """
    if not identifier:
        raise ValueError("identifier must be non-empty")
    radius = db.snippet_radius if radius is None else radius
    own_spans: dict[str, list[tuple[int, int]]] = {}
    for d in db.definitions.get(identifier, ()):
        own_spans.setdefault(d.file, []).append(d.line_span)
    usages: list[UsageReference] = []
    for rel in db.files:
        try:
            text = db.read_file(rel)
        except (OSError, UnicodeDecodeError):
            continue
        if identifier not in text:
            continue
        lines = text.splitlines()
        spans = own_spans.get(rel, ())
        for kind, value, line, _off in _lexer.tokenize(text):
            if kind != _lexer.IDENT or value != identifier:
                continue
            if any(lo <= line <= hi for lo, hi in spans):
                continue
            lo = max(1, line - radius)
            hi = min(len(lines), line + radius)
            snippet = "\n".join(lines[lo - 1:hi])
            usages.append(UsageReference(identifier, rel, line, snippet))
    return usages


def load_database(path: Path) -> DefinitionDatabase:
    return DefinitionDatabase.from_json(Path(path).read_text(encoding="utf-8"))


def save_database(db: DefinitionDatabase, path: Path) -> None:
    Path(path).write_text(db.to_json(), encoding="utf-8")
