import json
from pathlib import Path

import pytest

from speckernel.engine.backends import BackendConfig, QueryClient
from speckernel.indexer import DefinitionDatabase, SourceCorpus, index_corpus

ROOT = Path(__file__).resolve().parent
FIXTURES = ROOT / "fixtures"
CORPORA = FIXTURES / "corpora"
TRANSCRIPTS = FIXTURES / "transcripts"
SPECS = FIXTURES / "specs"


def make_db(name: str) -> DefinitionDatabase:
    return index_corpus(SourceCorpus(root_path=CORPORA / name))


@pytest.fixture()
def empty_db() -> DefinitionDatabase:
    return DefinitionDatabase(
        root_path=".", files=[], definitions={}, macros={}, file_index={}
    )


@pytest.fixture(scope="session")
def dm_db():
    return make_db("dm")


@pytest.fixture(scope="session")
def kvm_db():
    return make_db("kvm")


@pytest.fixture(scope="session")
def vfio_db():
    return make_db("vfio")


@pytest.fixture(scope="session")
def rds_db():
    return make_db("rds")


@pytest.fixture(scope="session")
def twodev_db():
    return make_db("twodev")


class CannedBackend:
    """Answers queries from a queue; dict replies are JSON-encoded."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.query_count = 0
        self.prompts: list[str] = []

    def complete(self, key, prompt_text, messages):
        self.query_count += 1
        self.prompts.append(prompt_text)
        if not self.replies:
            raise AssertionError("canned backend ran out of replies")
        reply = self.replies.pop(0)
        return reply if isinstance(reply, str) else json.dumps(reply)


class RuleBackend:
    """Answers by substring rules over the prompt, like the recorder script."""

    def __init__(self, rules):
        # rules: list of (needles tuple, reply dict/str/callable)
        self.rules = list(rules)
        self.query_count = 0
        self.prompts: list[str] = []

    def complete(self, key, prompt_text, messages):
        self.query_count += 1
        self.prompts.append(prompt_text)
        body = prompt_text.split("== RELATED CODE ==", 1)[-1]
        for needles, reply in self.rules:
            if all(n in body for n in needles):
                if callable(reply):
                    reply = reply(body)
                return reply if isinstance(reply, str) else json.dumps(reply)
        raise AssertionError("no rule matches prompt:\n" + body[:300])


def make_client(backend, **cfg_kw) -> QueryClient:
    cfg = BackendConfig(kind="replay", transcripts_dir="-", **cfg_kw)
    return QueryClient(cfg, backend=backend)


def envelope(result, unknowns=()):
    return {"result": result, "unknowns": list(unknowns)}
