"""Provider-agnostic chat-completion client with a record/replay cache.

The endpoint, key, and model come from the LLM_API_URL / LLM_API_KEY /
LLM_MODEL environment variables (OpenAI-style chat completions payload).
Every call is keyed by a content hash of the full message prefix, so a
recorded run can be replayed byte-identically with no network access.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from typing import Callable, Optional

import httpx

ENV_URL = "LLM_API_URL"
ENV_KEY = "LLM_API_KEY"
ENV_MODEL = "LLM_MODEL"

Transport = Callable[[list[dict], str, float], str]


class LlmError(RuntimeError):
    """The chat backend failed or returned an unusable reply."""


class RateLimiter:
    """Caps in-flight backend calls across all agents of a process."""

    def __init__(self, max_concurrent: int = 4):
        self._semaphore = threading.Semaphore(max_concurrent)

    def __enter__(self) -> "RateLimiter":
        self._semaphore.acquire()
        return self

    def __exit__(self, *exc) -> None:
        self._semaphore.release()


GLOBAL_RATE_LIMITER = RateLimiter()


def transcript_hash(messages: list[dict], model: str, sample_tag: str = "") -> str:
    """Content address of a call: full message prefix + model + tag."""
    payload = json.dumps(
        {"messages": messages, "model": model, "tag": sample_tag},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def http_transport(url: str, api_key: str, timeout: float = 60.0) -> Transport:
    """POST an OpenAI-style chat completion request and return the text."""

    def call(messages: list[dict], model: str, temperature: float) -> str:
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        response = httpx.post(
            url,
            json={"model": model, "messages": messages, "temperature": temperature},
            headers=headers,
            timeout=timeout,
        )
        response.raise_for_status()
        body = response.json()
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise LlmError(f"unexpected completion payload: {body!r}") from exc

    return call


class ChatClient:
    """Chat completions with retries and an optional on-disk replay cache.

    cache_mode:
      * "off"    - always call the transport.
      * "record" - call the transport and store every reply.
      * "replay" - only serve cached replies; a miss is an error.
      * "auto"   - serve from cache when possible, otherwise call + store.
    """

    def __init__(
        self,
        model: Optional[str] = None,
        temperature: float = 1.0,
        transport: Optional[Transport] = None,
        cache_dir: Optional[str] = None,
        cache_mode: str = "auto",
        max_attempts: int = 3,
        backoff_seconds: float = 1.0,
    ):
        if cache_mode not in ("off", "record", "replay", "auto"):
            raise ValueError(f"unknown cache_mode {cache_mode!r}")
        if cache_mode != "off" and cache_dir is None:
            raise ValueError("cache_dir required unless cache_mode='off'")
        self.model = model or os.environ.get(ENV_MODEL, "")
        self.temperature = temperature
        self.cache_dir = cache_dir
        self.cache_mode = cache_mode
        self.max_attempts = max_attempts
        self.backoff_seconds = backoff_seconds
        if transport is None and cache_mode != "replay":
            url = os.environ.get(ENV_URL)
            if not url:
                raise LlmError(
                    f"no transport configured and {ENV_URL} is not set; "
                    "set LLM_API_URL/LLM_API_KEY/LLM_MODEL or use replay mode"
                )
            transport = http_transport(url, os.environ.get(ENV_KEY, ""))
        self.transport = transport

    def _cache_file(self, key: str) -> str:
        assert self.cache_dir is not None
        return os.path.join(self.cache_dir, f"{key}.json")

    def _cache_get(self, key: str) -> Optional[str]:
        path = self._cache_file(key)
        if not os.path.exists(path):
            return None
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)["reply"]

    def _cache_put(self, key: str, messages: list[dict], reply: str) -> None:
        assert self.cache_dir is not None
        os.makedirs(self.cache_dir, exist_ok=True)
        record = {"key": key, "model": self.model, "messages": messages, "reply": reply}
        with open(self._cache_file(key), "w", encoding="utf-8") as fh:
            json.dump(record, fh, ensure_ascii=False, indent=1)

    def _call_with_retries(self, messages: list[dict]) -> str:
        assert self.transport is not None
        last_error: Optional[Exception] = None
        for attempt in range(self.max_attempts):
            try:
                with GLOBAL_RATE_LIMITER:
                    return self.transport(messages, self.model, self.temperature)
            except Exception as exc:
                last_error = exc
                if attempt + 1 < self.max_attempts:
                    time.sleep(self.backoff_seconds * (2**attempt))
        raise LlmError(
            f"chat completion failed after {self.max_attempts} attempts: {last_error}"
        ) from last_error

    def complete(self, messages: list[dict], sample_tag: str = "") -> str:
        """Reply to a full message prefix, through the cache policy."""
        if self.cache_mode == "off":
            return self._call_with_retries(messages)
        key = transcript_hash(messages, self.model, sample_tag)
        if self.cache_mode in ("replay", "auto"):
            cached = self._cache_get(key)
            if cached is not None:
                return cached
            if self.cache_mode == "replay":
                raise LlmError(f"replay cache miss for transcript {key[:12]}…")
        reply = self._call_with_retries(messages)
        self._cache_put(key, messages, reply)
        return reply
