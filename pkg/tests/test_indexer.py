"""Corpus indexing: census, determinism, round-trips, error paths."""

import pytest

from speckernel.indexer import (
    Definition,
    IndexError_,
    SourceCorpus,
    extract_code,
    find_usages,
    index_corpus,
    load_database,
    save_database,
    scan_text,
)

from conftest import CORPORA, make_db


def test_dm_census():
    db = make_db("dm")
    assert len(db.files) == 12
    assert db.counts() == {"macro": 66, "struct": 8, "function": 24, "globalvar": 2}


def test_known_definitions_present():
    db = make_db("dm")
    one = {d.kind for d in db.definitions["ctl_ioctl"]}
    assert one == {"function"}
    assert {d.kind for d in db.definitions["dm_ioctl"]} == {"struct"}
    assert "_ctl_fops" in db.definitions
    assert db.definitions["_ctl_fops"][0].kind == "globalvar"
    assert db.macros["DM_VERSION_MAJOR"].strip() == "4"


def test_pointer_returning_function_is_a_function():
    db = make_db("dm")
    assert {d.kind for d in db.definitions["dm_get_target_type"]} == {"function"}
    assert "target_type" not in db.definitions  # only ever used as a type


def test_every_definition_reachable_both_ways():
    for name in ("dm", "kvm", "vfio", "rds", "twodev"):
        db = make_db(name)
        via_names = {id(d) for defs in db.definitions.values() for d in defs}
        via_files = {id(d) for defs in db.file_index.values() for d in defs}
        assert via_names == via_files


def test_multimap_ordering_is_deterministic():
    db = make_db("dm")
    for defs in db.definitions.values():
        keys = [(d.file, d.line_span[0]) for d in defs]
        assert keys == sorted(keys)


def test_rescan_of_definition_text_is_stable():
    for name in ("dm", "kvm", "oracle"):
        db = make_db(name)
        for defs in db.definitions.values():
            for d in defs:
                again = scan_text(d.text)
                assert [(r.kind, r.name) for r in again] == [(d.kind, d.name)], d
                assert again[0].text == d.text


def test_reindexing_single_file_reproduces_definitions():
    db = make_db("dm")
    rel = "drivers/md/dm-ioctl.c"
    solo = index_corpus(
        SourceCorpus(root_path=CORPORA / "dm", include_globs=(rel,))
    )
    assert solo.files == [rel]
    want = [(d.kind, d.name, d.text) for d in db.file_index[rel]]
    got = [(d.kind, d.name, d.text) for d in solo.file_index[rel]]
    assert got == want


def test_serialized_database_is_byte_identical_across_runs():
    a = index_corpus(SourceCorpus(root_path=CORPORA / "dm"))
    b = index_corpus(SourceCorpus(root_path=CORPORA / "dm"))
    assert a.to_json() == b.to_json()


def test_parallel_indexing_matches_serial():
    corpus = SourceCorpus(root_path=CORPORA / "dm")
    serial = index_corpus(corpus, parallelism=1)
    threaded = index_corpus(corpus, parallelism=4)
    assert serial.to_json() == threaded.to_json()


def test_save_load_round_trip(tmp_path):
    db = make_db("kvm")
    out = tmp_path / "defs.json"
    save_database(db, out)
    back = load_database(out)
    assert back.to_json() == db.to_json()
    assert back.definitions.keys() == db.definitions.keys()
    assert isinstance(back.definitions["kvm_dev_ioctl"][0], Definition)


def test_load_rejects_unknown_schema(tmp_path):
    out = tmp_path / "defs.json"
    out.write_text('{"schema": "v999", "definitions": {}}')
    with pytest.raises(ValueError, match="schema"):
        load_database(out)


def test_unreadable_file_skipped_and_recorded():
    db = index_corpus(SourceCorpus(root_path=CORPORA / "badutf"))
    assert db.files == ["good.c"]
    assert [w["file"] for w in db.warnings] == ["broken.c"]
    assert "ok_function" in db.definitions


def test_unreadable_file_aborts_when_strict():
    corpus = SourceCorpus(root_path=CORPORA / "badutf")
    with pytest.raises(IndexError_) as exc:
        index_corpus(corpus, skip_unreadable=False)
    assert exc.value.path == "broken.c"


def test_missing_root_raises():
    with pytest.raises(IndexError_, match="not a directory"):
        SourceCorpus(root_path=CORPORA / "does-not-exist").matched_files()


def test_exclude_globs():
    corpus = SourceCorpus(
        root_path=CORPORA / "dm", exclude_globs=("include/**", "include/*")
    )
    files = corpus.matched_files()
    assert files and all(f.startswith("drivers/") for f in files)


def test_duplicate_statics_all_retained(tmp_path):
    (tmp_path / "a.c").write_text("static int helper(void)\n{\n\treturn 1;\n}\n")
    (tmp_path / "b.c").write_text("static int helper(void)\n{\n\treturn 2;\n}\n")
    db = index_corpus(SourceCorpus(root_path=tmp_path))
    defs = extract_code(db, "helper")
    assert [(d.file, d.kind) for d in defs] == [("a.c", "function"), ("b.c", "function")]
    assert "return 1" in defs[0].text and "return 2" in defs[1].text


def test_extract_code_unknown_and_empty():
    db = make_db("dm")
    assert extract_code(db, "no_such_symbol") == []
    with pytest.raises(ValueError):
        extract_code(db, "")


def test_last_macro_definition_wins(tmp_path):
    (tmp_path / "a.h").write_text("#define N 1\n")
    (tmp_path / "z.h").write_text("#define N 2\n")
    db = index_corpus(SourceCorpus(root_path=tmp_path))
    assert len(db.definitions["N"]) == 2
    assert db.macros["N"].strip() == "2"


def test_find_usages_excludes_own_definition():
    db = make_db("dm")
    refs = find_usages(db, "ctl_ioctl")
    assert refs, "ctl_ioctl is called from dm_ctl_ioctl"
    own = db.definitions["ctl_ioctl"][0]
    for r in refs:
        lo, hi = own.line_span
        assert not (r.file == own.file and lo <= r.line <= hi)
        assert "ctl_ioctl" in r.snippet


def test_find_usages_snippet_radius():
    db = make_db("dm")
    wide = find_usages(db, "_ctl_fops", radius=20)
    tight = find_usages(db, "_ctl_fops", radius=1)
    assert len(wide) == len(tight) > 0
    assert len(tight[0].snippet) < len(wide[0].snippet)
    assert tight[0].snippet.count("\n") <= 2
