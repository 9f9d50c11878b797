"""Chat-completion backends and the retrying query loop.

Every backend exposes ``complete(prompt, max_tokens) -> str``. The HTTP
backend speaks the OpenAI chat-completion wire shape, which covers hosted
APIs and self-hosted servers alike; the mock backends (scripted replies,
a rule callable, replay of a logged run, scripted price paths) need no
network and are used by the test suite.
"""
from __future__ import annotations

import json
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import httpx

from ...errors import AgentFailure, BackendTimeout, ConfigError, MalformedResponse, TransportError
from ..rule import ScriptedAgent, expand_segments, scripted_act
from .config import BackendConfig
from .parsing import ParsedResponse, format_response, parse_response

FORMAT_REMINDER = ("\n\nYour previous reply could not be parsed. Follow the response template "
                   "exactly and state your price as: My chosen price: \\boxed{<number>}.")

_ROUND_IN_PROMPT = re.compile(r"The current round is round (\d+)\.|<round>(\d+)</round>")


def prompted_round(prompt: str) -> int | None:
    """Round number a prompt asks about, from its instruction or response template."""
    m = _ROUND_IN_PROMPT.search(prompt)
    return int(m.group(1) or m.group(2)) if m else None


class OpenAIChatBackend:
    def __init__(self, cfg: BackendConfig, client: httpx.Client | None = None):
        self.cfg = cfg
        self._key = cfg.api_key()
        self._client = client or httpx.Client(timeout=cfg.timeout)

    def complete(self, prompt: str, max_tokens: int | None = None) -> str:
        headers = {"Content-Type": "application/json"}
        if self._key:
            headers["Authorization"] = f"Bearer {self._key}"
        body = {"model": self.cfg.model_name,
                "messages": [{"role": "user", "content": prompt}],
                "temperature": self.cfg.temperature}
        if max_tokens:
            body["max_tokens"] = max_tokens
        url = self.cfg.endpoint.rstrip("/") + "/chat/completions"
        try:
            resp = self._client.post(url, json=body, headers=headers, timeout=self.cfg.timeout)
        except httpx.TimeoutException as exc:
            raise BackendTimeout(f"{url}: {exc}") from exc
        except httpx.HTTPError as exc:
            raise TransportError(f"{url}: {exc}") from exc
        if resp.status_code >= 400:
            raise TransportError(f"{url}: HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            msg = resp.json()["choices"][0]["message"]
        except (ValueError, KeyError, IndexError) as exc:
            raise TransportError(f"{url}: unexpected payload") from exc
        content = msg.get("content") or ""
        reasoning = msg.get("reasoning_content")
        # some servers split the chain of thought out; keep it for the audit log
        return f"<think>\n{reasoning}\n</think>\n{content}" if reasoning else content


class ScriptedBackend:
    """Returns canned replies in order; the last is repeated if ``hold_last``."""

    deterministic = True

    def __init__(self, responses, hold_last: bool = True):
        self.responses = list(responses)
        if not self.responses:
            raise ConfigError("scripted backend needs at least one response")
        self.hold_last = hold_last
        self.calls = 0
        self.prompts: list[str] = []
        self._lock = threading.Lock()

    def complete(self, prompt: str, max_tokens: int | None = None) -> str:
        with self._lock:
            k = self.calls
            self.calls += 1
            self.prompts.append(prompt)
        if k < len(self.responses):
            return self.responses[k]
        if self.hold_last:
            return self.responses[-1]
        raise TransportError("scripted backend exhausted")


class RuleBackend:
    """Delegates to ``fn(prompt) -> reply``."""

    deterministic = True

    def __init__(self, fn: Callable[[str], str]):
        self.fn = fn
        self.calls = 0
        self.prompts: list[str] = []

    def complete(self, prompt: str, max_tokens: int | None = None) -> str:
        self.calls += 1
        self.prompts.append(prompt)
        return self.fn(prompt)


class PricePathBackend(RuleBackend):
    """Answers round i with well-formed text quoting ``prices[i-1]``.

    The round is read from the prompt itself, so the reply is a function of
    the prompt only.
    """

    def __init__(self, prices, hold_last: bool = True, rationale: str = "", strategy: str = ""):
        script = ScriptedAgent(tuple(prices), hold_last)

        def reply(prompt: str) -> str:
            i = prompted_round(prompt) or 1
            return format_response(i, scripted_act(script, i - 1), rationale, strategy)

        super().__init__(reply)


class ReplayBackend:
    """Replays the responses one agent gave in a logged run, by period."""

    deterministic = True

    def __init__(self, io_log, agent: int):
        self.by_round: dict[int, str] = {}
        with open(io_log, encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                if rec.get("agent") == agent and rec.get("response") is not None:
                    self.by_round[rec["t"]] = rec["response"]
        self.calls = 0

    def complete(self, prompt: str, max_tokens: int | None = None) -> str:
        self.calls += 1
        i = prompted_round(prompt)
        if i not in self.by_round:
            raise TransportError("no logged response for this round")
        return self.by_round[i]


def make_backend(cfg: BackendConfig):
    """Instantiate the backend described by ``cfg``; fails fast on missing keys."""
    opts = cfg.options or {}
    if cfg.kind == "openai":
        return OpenAIChatBackend(cfg)
    if cfg.kind == "scripted":
        return ScriptedBackend(opts["responses"], opts.get("hold_last", True))
    if cfg.kind == "price_path":
        prices = expand_segments(opts["segments"]) if "segments" in opts else opts["prices"]
        return PricePathBackend(prices, opts.get("hold_last", True),
                                opts.get("rationale", ""), opts.get("strategy", ""))
    if cfg.kind == "replay":
        return ReplayBackend(Path(opts["io_log"]), int(opts["agent"]))
    raise ConfigError(f"unknown backend kind {cfg.kind!r}")


@dataclass
class QueryResult:
    text: str
    parsed: ParsedResponse
    attempts: int
    rejected: list[str]


def query(backend, prompt: str, max_retries: int = 2, token_cap: int | None = None,
          expected_round: int | None = None, backoff: float = 0.0) -> QueryResult:
    """Ask the backend and parse the reply, allowing ``max_retries`` extra calls.

    Malformed replies are retried with a format reminder appended to the
    prompt; transport errors are retried after an exponential backoff.
    Raises :class:`AgentFailure` once ``1 + max_retries`` calls have failed.
    """
    rejected: list[str] = []
    last_error: Exception | None = None
    current = prompt
    for attempt in range(1 + max_retries):
        try:
            text = backend.complete(current, token_cap)
        except TransportError as exc:
            last_error = exc
            if backoff:
                time.sleep(backoff * 2 ** attempt)
            continue
        try:
            parsed = parse_response(text, expected_round)
        except MalformedResponse as exc:
            last_error = exc
            rejected.append(text)
            current = prompt + FORMAT_REMINDER
            continue
        return QueryResult(text=text, parsed=parsed, attempts=attempt + 1, rejected=rejected)
    raise AgentFailure(f"no valid price after {1 + max_retries} attempts: {last_error}") from last_error
