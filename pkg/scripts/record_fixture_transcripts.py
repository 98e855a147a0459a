"""Regenerate the replay transcripts the offline tests consume.

Runs the full pipeline over each miniature corpus with the scripted
backend wrapped in a recorder and stores the prompt/reply pairs under
tests/fixtures/transcripts/<corpus>/.  Rerun whenever the corpora, the
prompt templates, or the scripted rules change, then commit the result.
"""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "scripts"))

from scripted_model import ScriptedModel  # noqa: E402

from speckernel.engine.backends import BackendConfig, QueryClient, RecordBackend
from speckernel.indexer import SourceCorpus, find_operation_handlers, index_corpus
from speckernel.pipeline import run_pipeline

FIXTURES = ROOT / "tests" / "fixtures"

# corpus name -> handler structs to keep (None keeps every handler);
# beta_fops stays unrecorded so replay misses have a fixture
CORPORA: list[tuple[str, tuple[str, ...] | None]] = [
    ("dm", None),
    ("kvm", None),
    ("vfio", None),
    ("rds", None),
    ("twodev", ("alpha_fops",)),
]


def record_one(name: str, keep: tuple[str, ...] | None) -> None:
    corpus_dir = FIXTURES / "corpora" / name
    tdir = FIXTURES / "transcripts" / name
    if tdir.exists():
        shutil.rmtree(tdir)
    tdir.mkdir(parents=True)

    db = index_corpus(SourceCorpus(root_path=corpus_dir))
    handlers = find_operation_handlers(db)
    if keep is not None:
        handlers = [h for h in handlers if h.struct_name in keep]
    if not handlers:
        raise SystemExit(f"{name}: no handlers found, nothing to record")

    cfg = BackendConfig(transcripts_dir=str(tdir))
    backend = RecordBackend(ScriptedModel(), tdir)
    with tempfile.TemporaryDirectory() as out:
        report = run_pipeline(
            db, handlers, lambda: QueryClient(cfg, backend=backend), Path(out)
        )

    statuses = ", ".join(
        f"{h}={e['status']}" for h, e in sorted(report["handlers"].items())
    )
    count = len(list(tdir.glob("*.json")))
    print(f"{name}: {count} transcripts ({statuses})")


def main() -> None:
    for name, keep in CORPORA:
        record_one(name, keep)


if __name__ == "__main__":
    main()
