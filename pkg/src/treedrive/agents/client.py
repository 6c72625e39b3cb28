"""Chat backends: a live OpenAI-compatible HTTP client, a scripted replay client
for offline tests, and a recorder that captures live replies as replay fixtures.

Fixture directories hold one ``<name>.txt`` file per reply and a ``script.txt``
listing reply names in call order (blank lines and ``#`` comments skipped).
"""

from __future__ import annotations

import logging
import os
import time
from pathlib import Path
from typing import Mapping, NamedTuple, Protocol, Sequence

import httpx

logger = logging.getLogger(__name__)

ENV_ENDPOINT = "TREEDRIVE_LLM_ENDPOINT"
ENV_MODEL = "TREEDRIVE_LLM_MODEL"
ENV_API_KEY = "TREEDRIVE_LLM_API_KEY"
SCRIPT_FILE = "script.txt"


class Message(NamedTuple):
    role: str  # "system" | "user" | "assistant"
    content: str


class ChatClient(Protocol):
    def send(self, messages: Sequence[Message]) -> str: ...


class ChatError(RuntimeError):
    pass


class ReplayExhausted(ChatError):
    pass


class HTTPChatClient:
    """OpenAI-style ``/chat/completions`` client. Safe to share across threads."""

    RETRY_STATUS = frozenset({408, 429, 500, 502, 503, 504})

    def __init__(self, endpoint: str, model: str, api_key: str | None = None,
                 timeout: float = 120.0, max_retries: int = 3, backoff: float = 2.0,
                 temperature: float | None = None, transport: httpx.BaseTransport | None = None):
        url = endpoint.rstrip("/")
        if not url.endswith("/chat/completions"):
            url += "/chat/completions"
        self.url = url
        self.model = model
        self.max_retries = max_retries
        self.backoff = backoff
        self.temperature = temperature
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._http = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    @classmethod
    def from_env(cls, overrides: Mapping[str, str] | None = None, **kwargs) -> "HTTPChatClient":
        """Endpoint and model from the environment, optionally overridden by
        ``llm_endpoint`` / ``llm_model`` config keys. The key only comes from the environment."""
        overrides = overrides or {}
        endpoint = overrides.get("llm_endpoint") or os.environ.get(ENV_ENDPOINT)
        model = overrides.get("llm_model") or os.environ.get(ENV_MODEL)
        if not endpoint or not model:
            raise ChatError(f"live backend needs {ENV_ENDPOINT} and {ENV_MODEL} "
                            "(or llm_endpoint / llm_model in the config file)")
        return cls(endpoint, model, os.environ.get(ENV_API_KEY), **kwargs)

    def send(self, messages: Sequence[Message]) -> str:
        payload: dict = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
        }
        if self.temperature is not None:
            payload["temperature"] = self.temperature
        for attempt in range(self.max_retries + 1):
            try:
                resp = self._http.post(self.url, json=payload)
            except httpx.TransportError as exc:
                if attempt == self.max_retries:
                    raise ChatError(f"request to {self.url} failed: {exc}") from exc
                self._sleep(attempt, None)
                continue
            if resp.status_code in self.RETRY_STATUS and attempt < self.max_retries:
                self._sleep(attempt, resp.headers.get("Retry-After"))
                continue
            if resp.status_code != 200:
                raise ChatError(f"{self.url} returned {resp.status_code}: {resp.text[:500]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise ChatError(f"unexpected response body: {resp.text[:500]}") from exc
        raise ChatError("unreachable")

    def _sleep(self, attempt: int, retry_after: str | None) -> None:
        try:
            delay = float(retry_after) if retry_after else self.backoff * 2 ** attempt
        except ValueError:
            delay = self.backoff * 2 ** attempt
        logger.warning("chat request failed, retrying in %.1fs", delay)
        time.sleep(delay)

    def close(self) -> None:
        self._http.close()


class ReplayChatClient:
    """Returns scripted replies in order. Single-flight; fully deterministic."""

    def __init__(self, replies: Mapping[str, str], script: Sequence[str]):
        missing = [name for name in script if name not in replies]
        if missing:
            raise ChatError(f"script references unknown fixtures: {missing}")
        self.replies = dict(replies)
        self.script = list(script)
        self.calls: list[list[Message]] = []
        self.served: list[str] = []

    @classmethod
    def from_dir(cls, directory: str | Path) -> "ReplayChatClient":
        directory = Path(directory)
        script = read_script(directory / SCRIPT_FILE)
        replies = {p.stem: p.read_text(encoding="utf-8") for p in sorted(directory.glob("*.txt"))
                   if p.name != SCRIPT_FILE}
        return cls(replies, script)

    def send(self, messages: Sequence[Message]) -> str:
        k = len(self.calls)
        if k >= len(self.script):
            raise ReplayExhausted(f"replay script exhausted after {k} replies")
        self.calls.append(list(messages))
        name = self.script[k]
        self.served.append(name)
        return self.replies[name]


class RecordingChatClient:
    """Forwards to ``inner`` and saves each reply so the run can be replayed."""

    def __init__(self, inner: ChatClient, directory: str | Path):
        self.inner = inner
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.names: list[str] = []

    def send(self, messages: Sequence[Message]) -> str:
        reply = self.inner.send(messages)
        name = f"reply_{len(self.names) + 1:03d}"
        (self.directory / f"{name}.txt").write_text(reply, encoding="utf-8")
        self.names.append(name)
        (self.directory / SCRIPT_FILE).write_text("\n".join(self.names) + "\n", encoding="utf-8")
        return reply


def read_script(path: Path) -> list[str]:
    names = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            names.append(line)
    return names
