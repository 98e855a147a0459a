"""Model backends: live HTTP, deterministic replay, and recording.

Every query is keyed by a SHA-256 over (stage, model, temperature, prompt
text). Replay answers from a directory of <key>.json transcripts; Record
wraps another backend and writes the same format, so a recorded run can
be replayed byte-for-byte later. Responses are additionally cached by the
same key so one session never sends identical prompts twice.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .prompts import Prompt, Stage

_C_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

REFORMAT_INSTRUCTION = (
    "Your previous answer could not be parsed ({error}). Reply again with "
    "a single JSON object of the form {{\"result\": ..., \"unknowns\": [...]}} "
    "and nothing else."
)


class BackendUnavailable(Exception):
    pass


class ReplayMiss(Exception):
    def __init__(self, prompt_hash: str):
        self.prompt_hash = prompt_hash
        super().__init__(f"no recorded transcript for prompt {prompt_hash}")


class MalformedResponse(Exception):
    def __init__(self, raw_text: str, detail: str = ""):
        self.raw_text = raw_text
        super().__init__(detail or "response does not match the expected envelope")


@dataclass(frozen=True)
class UnknownTarget:
    identifier: str
    kind: str  # "Function" or "Type"
    usage_info: str


@dataclass(frozen=True)
class AnalysisResponse:
    result: dict
    unknowns: tuple[UnknownTarget, ...]
    raw_text: str


@dataclass
class BackendConfig:
    kind: str = "replay"  # http | replay | record
    endpoint_url: str = ""
    model_name: str = "default"
    temperature: float = 0.1
    max_retries: int = 3
    cache_dir: str | None = None
    transcripts_dir: str | None = None
    max_in_flight: int = 4
    requests_per_second: float = 0.0  # 0 disables rate limiting
    api_key_env: str = "SPECKERNEL_API_KEY"

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")
        if self.kind in ("replay", "record") and not self.transcripts_dir:
            raise ValueError(f"{self.kind} backend requires transcripts_dir")


def prompt_cache_key(stage: Stage | str, model_name: str, temperature: float, text: str) -> str:
    stage_value = stage.value if isinstance(stage, Stage) else str(stage)
    material = json.dumps(
        [stage_value, model_name, temperature, text], sort_keys=False
    ).encode("utf-8")
    return hashlib.sha256(material).hexdigest()


def parse_envelope(raw: str) -> AnalysisResponse:
    """Parse the model's JSON envelope; raises MalformedResponse otherwise."""
    text = raw.strip()
    # tolerate a fenced code block around the JSON, a common model habit
    if text.startswith("```"):
        text = re.sub(r"^```[a-zA-Z]*\n?", "", text)
        text = re.sub(r"\n?```$", "", text).strip()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedResponse(raw, f"not valid JSON: {e}") from None
    if not isinstance(doc, dict) or "result" not in doc:
        raise MalformedResponse(raw, "missing 'result' key")
    result = doc["result"]
    if result is None:
        result = {}
    if not isinstance(result, dict):
        raise MalformedResponse(raw, "'result' must be an object")
    unknowns_raw = doc.get("unknowns", [])
    if not isinstance(unknowns_raw, list):
        raise MalformedResponse(raw, "'unknowns' must be a list")
    unknowns: list[UnknownTarget] = []
    seen = set()
    for u in unknowns_raw:
        if not isinstance(u, dict) or "identifier" not in u:
            raise MalformedResponse(raw, "unknown entry without 'identifier'")
        ident = str(u["identifier"])
        if not _C_IDENT_RE.fullmatch(ident):
            raise MalformedResponse(raw, f"implausible identifier {ident!r}")
        kind = str(u.get("kind", "Function"))
        if kind not in ("Function", "Type"):
            raise MalformedResponse(raw, f"unknown kind {kind!r}")
        if ident in seen:
            continue
        seen.add(ident)
        unknowns.append(
            UnknownTarget(identifier=ident, kind=kind, usage_info=str(u.get("usage_info", "")))
        )
    return AnalysisResponse(result=result, unknowns=tuple(unknowns), raw_text=raw)


def _atomic_write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


class _TokenBucket:
    def __init__(self, rate: float, capacity: float | None = None):
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(rate, 1.0)
        self.tokens = self.capacity
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self):
        if self.rate <= 0:
            return
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


class ReplayBackend:
    """Answers prompts from recorded transcripts; deterministic and offline."""

    def __init__(self, transcripts_dir):
        self.dir = Path(transcripts_dir)
        self.query_count = 0
        self._lock = threading.Lock()

    def complete(self, key: str, prompt_text: str, messages) -> str:
        with self._lock:
            self.query_count += 1
        path = self.dir / f"{key}.json"
        if not path.is_file():
            raise ReplayMiss(key)
        doc = json.loads(path.read_text(encoding="utf-8"))
        return doc["response"]


class RecordBackend:
    """Delegates to another backend and persists every exchange."""

    def __init__(self, inner, transcripts_dir):
        self.inner = inner
        self.dir = Path(transcripts_dir)
        self.query_count = 0
        self._lock = threading.Lock()

    def complete(self, key: str, prompt_text: str, messages) -> str:
        with self._lock:
            self.query_count += 1
        response = self.inner.complete(key, prompt_text, messages)
        doc = {"prompt": prompt_text, "response": response}
        _atomic_write_text(self.dir / f"{key}.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return response


class HttpBackend:
    """Chat-completion endpoint client used for live runs."""

    def __init__(self, cfg: BackendConfig):
        if not cfg.endpoint_url:
            raise BackendUnavailable("http backend needs an endpoint_url")
        self.cfg = cfg
        self.query_count = 0
        self._lock = threading.Lock()
        self._inflight = threading.Semaphore(cfg.max_in_flight)
        self._bucket = _TokenBucket(cfg.requests_per_second)

    def complete(self, key: str, prompt_text: str, messages) -> str:
        import requests

        with self._lock:
            self.query_count += 1
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.cfg.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.cfg.model_name,
            "temperature": self.cfg.temperature,
            "messages": list(messages),
        }
        self._bucket.acquire()
        with self._inflight:
            try:
                resp = requests.post(
                    self.cfg.endpoint_url, json=payload, headers=headers, timeout=120
                )
            except requests.RequestException as e:
                raise BackendUnavailable(str(e)) from e
        if resp.status_code != 200:
            raise BackendUnavailable(f"endpoint returned HTTP {resp.status_code}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as e:
            raise BackendUnavailable(f"unexpected response shape: {e}") from e


def make_backend(cfg: BackendConfig):
    if cfg.kind == "replay":
        return ReplayBackend(cfg.transcripts_dir)
    if cfg.kind == "record":
        return RecordBackend(HttpBackend(cfg), cfg.transcripts_dir)
    if cfg.kind == "http":
        return HttpBackend(cfg)
    raise ValueError(f"unknown backend kind {cfg.kind!r}")


class QueryClient:
    """Caching front end over a backend, with retry-on-malformed."""

    def __init__(self, cfg: BackendConfig, backend=None):
        self.cfg = cfg
        self.backend = backend if backend is not None else make_backend(cfg)
        self._memory: dict[str, str] = {}
        self._lock = threading.Lock()
        self.cache_dir = Path(cfg.cache_dir) if cfg.cache_dir else None

    @property
    def query_count(self) -> int:
        return self.backend.query_count

    def _cached(self, key: str) -> str | None:
        with self._lock:
            if key in self._memory:
                return self._memory[key]
        if self.cache_dir is not None:
            path = self.cache_dir / f"{key}.json"
            if path.is_file():
                doc = json.loads(path.read_text(encoding="utf-8"))
                with self._lock:
                    self._memory[key] = doc["response"]
                return doc["response"]
        return None

    def _store(self, key: str, prompt_text: str, response: str):
        with self._lock:
            self._memory[key] = response
        if self.cache_dir is not None:
            doc = {"prompt": prompt_text, "response": response}
            _atomic_write_text(
                self.cache_dir / f"{key}.json", json.dumps(doc, indent=2, sort_keys=True) + "\n"
            )

    def _complete(self, stage: Stage, prompt_text: str, messages) -> str:
        key = prompt_cache_key(stage, self.cfg.model_name, self.cfg.temperature, prompt_text)
        cached = self._cached(key)
        if cached is not None:
            return cached
        response = self.backend.complete(key, prompt_text, messages)
        self._store(key, prompt_text, response)
        return response

    def query(self, prompt: Prompt) -> AnalysisResponse:
        """One envelope-parsed exchange, re-asking on malformed output."""
        messages = [
            {"role": "system", "content": prompt.system_text},
            {"role": "user", "content": prompt.text},
        ]
        prompt_text = prompt.text
        raw = self._complete(prompt.stage, prompt_text, messages)
        for _attempt in range(self.cfg.max_retries + 1):
            try:
                return parse_envelope(raw)
            except MalformedResponse as e:
                last_error = e
                if _attempt == self.cfg.max_retries:
                    break
                follow_up = REFORMAT_INSTRUCTION.format(error=e)
                messages = messages + [
                    {"role": "assistant", "content": raw},
                    {"role": "user", "content": follow_up},
                ]
                prompt_text = prompt_text + "\n\n== REFORMAT ==\n" + follow_up
                raw = self._complete(prompt.stage, prompt_text, messages)
        raise last_error


def query_backend(prompt: Prompt, cfg: BackendConfig, client: QueryClient | None = None) -> AnalysisResponse:
    """Convenience wrapper; prefer holding one QueryClient per run."""
    if client is None:
        client = QueryClient(cfg)
    return client.query(prompt)
