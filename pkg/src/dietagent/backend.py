"""Chat-completion backends for the planner and response generator.

The HTTP backend speaks the de-facto chat-completions shape: POST
{"model", "messages", "temperature"} and read the assistant text from
choices[0].message.content. The scripted backend replays canned replies
from a fixture file so agent behavior can be tested with no model and no
network at all.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import requests

from .errors import BackendError

DEFAULT_MAX_STEPS = 5


@dataclass
class ChatBackendConfig:
    endpoint: str = ""
    model: str = ""
    temperature: float = 0.0
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    @classmethod
    def from_env(cls) -> "ChatBackendConfig":
        return cls(
            endpoint=os.environ.get("CHAT_BACKEND_URL", ""),
            model=os.environ.get("CHAT_BACKEND_MODEL", "gpt-3.5-turbo"),
            temperature=float(os.environ.get("CHAT_BACKEND_TEMPERATURE", "0")),
            max_steps=int(os.environ.get("CHAT_BACKEND_MAX_STEPS", str(DEFAULT_MAX_STEPS))),
        )


class ChatBackend:
    """Interface: complete(messages) -> assistant reply text."""

    def complete(self, messages: list[dict]) -> str:
        raise NotImplementedError


class HttpChatBackend(ChatBackend):
    def __init__(self, config: ChatBackendConfig, post=None, timeout: float = 60.0):
        if not config.endpoint:
            raise BackendError("chat backend endpoint not configured (CHAT_BACKEND_URL)")
        self.config = config
        self._post = post or requests.post
        self._timeout = timeout

    def complete(self, messages: list[dict]) -> str:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get("CHAT_BACKEND_API_KEY")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            response = self._post(
                self.config.endpoint,
                json={
                    "model": self.config.model,
                    "messages": messages,
                    "temperature": self.config.temperature,
                },
                headers=headers,
                timeout=self._timeout,
            )
        except Exception as exc:
            raise BackendError(f"chat backend unreachable: {exc}") from exc
        if response.status_code >= 400:
            raise BackendError(f"chat backend error {response.status_code}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendError(f"chat backend reply malformed: {exc}") from exc


class ScriptedChatBackend(ChatBackend):
    """Replays request/response pairs from a fixture.

    Each entry is {"response": str} with an optional {"expect": str}
    substring that must occur in the last message sent; a mismatch or an
    exhausted script raises BackendError. Holds no network resources.
    """

    def __init__(self, script: list[dict]):
        self._script = list(script)
        self._cursor = 0
        self.requests: list[list[dict]] = []

    @classmethod
    def from_file(cls, path) -> "ScriptedChatBackend":
        with open(path, "r", encoding="utf-8") as fh:
            return cls(json.load(fh))

    @property
    def calls(self) -> int:
        return self._cursor

    def complete(self, messages: list[dict]) -> str:
        self.requests.append([dict(m) for m in messages])
        if self._cursor >= len(self._script):
            raise BackendError("scripted backend exhausted")
        entry = self._script[self._cursor]
        self._cursor += 1
        expect = entry.get("expect")
        if expect is not None:
            last = messages[-1]["content"] if messages else ""
            if expect not in last:
                raise BackendError(f"scripted backend expected {expect!r} in prompt")
        return entry["response"]
