"""Model access with three modes: live HTTP, replay from a transcript, and
record (live calls appended to a transcript file).

Every call gets a deterministic tag `role:prompt-digest:index`, where index
counts repeats of the same (role, prompt) pair within one client's lifetime.
Replay resolves tags against a transcript, so a recorded run reproduces
byte-identically without network access.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

import requests

DEFAULT_ENDPOINT_VAR = "PLANLOOP_MODEL_URL"
DEFAULT_KEY_VAR = "PLANLOOP_MODEL_KEY"

_RETRIES = 3
_BACKOFF_SECONDS = (1.0, 2.0)
_TIMEOUT_SECONDS = 120.0


class ModelError(RuntimeError):
    """Live call failed after retries, or the response payload was unusable."""


class TranscriptMiss(KeyError):
    """Replay asked for a call tag the transcript does not contain."""

    def __init__(self, tag: str):
        self.tag = tag
        super().__init__(f"no transcript entry for {tag}")


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:12]


def call_tag(role: str, prompt: str, index: int) -> str:
    return f"{role}:{prompt_digest(prompt)}:{index}"


@dataclass(frozen=True)
class ModelRequest:
    role: str
    prompt: str
    temperature: float = 0.0


@dataclass(frozen=True)
class ModelResponse:
    call_tag: str
    text: str


@dataclass
class Transcript:
    """Ordered call-tag to response-text mapping, stored as NDJSON."""

    entries: dict[str, str] = field(default_factory=dict)

    def add(self, tag: str, text: str) -> None:
        self.entries[tag] = text

    def get(self, tag: str) -> str:
        try:
            return self.entries[tag]
        except KeyError:
            raise TranscriptMiss(tag) from None

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, tag: str) -> bool:
        return tag in self.entries

    @classmethod
    def load(cls, path: str | Path) -> "Transcript":
        transcript = cls()
        for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
            if not line.strip():
                continue
            row = json.loads(line)
            if set(row) != {"call_tag", "text"}:
                raise ValueError(f"transcript line {i + 1} must have call_tag and text")
            transcript.add(row["call_tag"], row["text"])
        return transcript

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        lines = [
            json.dumps({"call_tag": tag, "text": text}, sort_keys=True)
            for tag, text in self.entries.items()
        ]
        path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        return path


def script_transcript(calls: Iterable[tuple[str, str, str]]) -> Transcript:
    """Build a transcript from (role, prompt, response) triples, assigning
    indexes in order, exactly as a client replaying the same sequence will."""
    transcript = Transcript()
    counters: dict[tuple[str, str], int] = {}
    for role, prompt, response in calls:
        digest = prompt_digest(prompt)
        index = counters.get((role, digest), 0)
        counters[(role, digest)] = index + 1
        transcript.add(f"{role}:{digest}:{index}", response)
    return transcript


def _default_poster(url: str, payload: Mapping, headers: Mapping, timeout: float) -> str:
    response = requests.post(url, json=payload, headers=dict(headers), timeout=timeout)
    response.raise_for_status()
    body = response.json()
    if not isinstance(body, Mapping) or "text" not in body:
        raise ModelError(f"model endpoint returned no text field: {body!r}")
    return str(body["text"])


class ModelClient:
    """Issues model calls in one of three modes.

    replay: resolve against the given transcript, no network.
    live:   POST {role, prompt, temperature} to the endpoint.
    record: live, then append each exchange to `record_path`.
    """

    def __init__(
        self,
        mode: str = "replay",
        transcript: Transcript | None = None,
        record_path: str | Path | None = None,
        endpoint: str | None = None,
        api_key: str | None = None,
        poster: Callable[[str, Mapping, Mapping, float], str] | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        if mode not in ("replay", "live", "record"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "replay" and transcript is None:
            raise ValueError("replay mode needs a transcript")
        if mode == "record" and record_path is None:
            raise ValueError("record mode needs a record_path")
        self.mode = mode
        self.transcript = transcript if transcript is not None else Transcript()
        self.record_path = Path(record_path) if record_path else None
        self.endpoint = endpoint or os.environ.get(DEFAULT_ENDPOINT_VAR)
        self.api_key = api_key or os.environ.get(DEFAULT_KEY_VAR)
        self._poster = poster or _default_poster
        self._sleeper = sleeper
        self._lock = threading.Lock()
        self._counters: dict[tuple[str, str], int] = {}
        self._stats = {"calls": 0, "by_role": {}}

    def _next_tag(self, role: str, prompt: str) -> str:
        digest = prompt_digest(prompt)
        with self._lock:
            index = self._counters.get((role, digest), 0)
            self._counters[(role, digest)] = index + 1
            self._stats["calls"] += 1
            self._stats["by_role"][role] = self._stats["by_role"].get(role, 0) + 1
        return f"{role}:{digest}:{index}"

    @property
    def stats(self) -> dict:
        with self._lock:
            return {"calls": self._stats["calls"], "by_role": dict(self._stats["by_role"])}

    def _live_call(self, request: ModelRequest) -> str:
        if not self.endpoint:
            raise ModelError(
                f"no model endpoint configured; set {DEFAULT_ENDPOINT_VAR} or pass endpoint="
            )
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "role": request.role,
            "prompt": request.prompt,
            "temperature": request.temperature,
        }
        last_error: Exception | None = None
        for attempt in range(_RETRIES):
            try:
                return self._poster(self.endpoint, payload, headers, _TIMEOUT_SECONDS)
            except ModelError:
                raise
            except Exception as exc:  # noqa: BLE001 - network failures vary by stack
                last_error = exc
                if attempt < _RETRIES - 1:
                    self._sleeper(_BACKOFF_SECONDS[min(attempt, len(_BACKOFF_SECONDS) - 1)])
        raise ModelError(f"model call failed after {_RETRIES} attempts: {last_error}") from last_error

    def call(self, request: ModelRequest) -> ModelResponse:
        tag = self._next_tag(request.role, request.prompt)
        if self.mode == "replay":
            return ModelResponse(tag, self.transcript.get(tag))
        text = self._live_call(request)
        if self.mode == "record":
            self.transcript.add(tag, text)
            with self._lock, self.record_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"call_tag": tag, "text": text}, sort_keys=True) + "\n")
        return ModelResponse(tag, text)

    def complete(self, role: str, prompt: str, temperature: float = 0.0) -> str:
        return self.call(ModelRequest(role=role, prompt=prompt, temperature=temperature)).text
