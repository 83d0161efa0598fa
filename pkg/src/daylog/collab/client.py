"""LLM clients: a deterministic offline mock and a JSON-over-HTTP remote.

Both expose `complete(prompt, max_tokens) -> str`. The mock answers from a
rule table over the evidence it parses back out of the prompt, so tests
and offline runs need no network; the remote client posts to a configured
endpoint with retry and surfaces a typed error when the service stays
unreachable (callers then fall back to the local label).
"""

from __future__ import annotations

import json
import os
import re
import time
import urllib.error
import urllib.request
from dataclasses import dataclass

import numpy as np

ENDPOINT_ENV = "EGOLOG_LLM_ENDPOINT"
TOKEN_ENV = "EGOLOG_LLM_TOKEN"
DEFAULT_MAX_TOKENS = 16
DEFAULT_RETRIES = 2
DEFAULT_BACKOFF_SECONDS = 0.5


class LlmError(RuntimeError):
    """Raised when a remote completion cannot be obtained."""


_NEAR_RE = re.compile(
    r"^the (?P<event>.+) is happening in the near front of the user")
_FAR_RE = re.compile(
    r"^the (?P<event>.+) is happening in the "
    r"(?P<direction>front|left|back|right)\.$")
_MOTION_RE = re.compile(r"^the detected motion is (?P<motion>.+)\.$")
_PRELIM_RE = re.compile(
    r"^the preliminary scenario estimation is "
    r"(?P<label>.+), (?P<confidence>\d\.\d{2})\.$")


def parse_prompt_evidence(prompt: str) -> dict:
    """Recover the structured evidence from a prompt built by this package.

    Returns near/far event names, the motion text (spaces, as printed),
    and the preliminary (label, confidence). Used by the mock client; the
    grammar is ours, so parsing is exact.
    """
    near, far, motion, preliminary = [], [], None, None
    for line in prompt.split("\n")[1:]:
        m = _NEAR_RE.match(line)
        if m:
            near.append(m.group("event"))
            continue
        m = _FAR_RE.match(line)
        if m:
            far.append((m.group("event"), m.group("direction")))
            continue
        m = _MOTION_RE.match(line)
        if m:
            motion = m.group("motion")
            continue
        m = _PRELIM_RE.match(line)
        if m:
            preliminary = (m.group("label"), float(m.group("confidence")))
    return {"near_events": tuple(near), "far_events": tuple(far),
            "motion": motion, "preliminary": preliminary}


@dataclass(frozen=True)
class MockRule:
    """First-match rule: required evidence -> scenario label.

    `events` must all appear among the prompt's event names (near or far);
    `motion`, when set, must equal the prompt's motion text (with spaces).
    """

    label: str
    events: tuple[str, ...] = ()
    motion: str | None = None

    def matches(self, evidence: dict) -> bool:
        present = set(evidence["near_events"])
        present.update(name for name, _ in evidence["far_events"])
        if not set(self.events) <= present:
            return False
        if self.motion is not None and evidence["motion"] != self.motion:
            return False
        return True


class MockLlmClient:
    """Deterministic rule-table stand-in for the cloud model.

    Rules are checked in order; the first match answers. With no match the
    client echoes the preliminary label (refinement that keeps the local
    guess). Optional seeded noise answers a uniformly random category
    instead, for poisoning experiments — still reproducible.
    """

    def __init__(self, categories, rules: tuple[MockRule, ...] = (),
                 noise_rate: float = 0.0, seed: int = 0):
        self.categories = tuple(categories)
        if not self.categories:
            raise ValueError("mock client needs a category list")
        self.rules = tuple(rules)
        for rule in self.rules:
            if rule.label not in self.categories:
                raise ValueError(
                    f"rule label {rule.label!r} is not a known category")
        if not 0.0 <= noise_rate <= 1.0:
            raise ValueError("noise rate outside [0, 1]")
        self.noise_rate = float(noise_rate)
        self._rng = np.random.default_rng(seed)
        self.calls = 0

    def complete(self, prompt: str,
                 max_tokens: int = DEFAULT_MAX_TOKENS) -> str:
        self.calls += 1
        if self.noise_rate > 0.0 and self._rng.uniform() < self.noise_rate:
            return str(self._rng.choice(self.categories))
        evidence = parse_prompt_evidence(prompt)
        for rule in self.rules:
            if rule.matches(evidence):
                return rule.label
        if evidence["preliminary"] is not None:
            return evidence["preliminary"][0]
        return self.categories[0]


class RemoteLlmClient:
    """POST {prompt, max_tokens} as JSON; expect {text} back.

    Endpoint and bearer token come from the EGOLOG_LLM_ENDPOINT and
    EGOLOG_LLM_TOKEN environment variables unless given explicitly. Two
    retries with exponential backoff, then `LlmError`.
    """

    def __init__(self, endpoint: str | None = None,
                 token: str | None = None, timeout: float = 10.0,
                 retries: int = DEFAULT_RETRIES,
                 backoff_seconds: float = DEFAULT_BACKOFF_SECONDS):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        if not self.endpoint:
            raise LlmError(
                f"no endpoint configured; set {ENDPOINT_ENV} or pass one")
        self.token = token if token is not None \
            else os.environ.get(TOKEN_ENV)
        self.timeout = float(timeout)
        self.retries = int(retries)
        self.backoff_seconds = float(backoff_seconds)

    def complete(self, prompt: str,
                 max_tokens: int = DEFAULT_MAX_TOKENS) -> str:
        body = json.dumps({"prompt": prompt,
                           "max_tokens": int(max_tokens)}).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff_seconds * (2 ** (attempt - 1)))
            request = urllib.request.Request(self.endpoint, data=body,
                                             headers=headers, method="POST")
            try:
                with urllib.request.urlopen(request,
                                            timeout=self.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
            except (urllib.error.URLError, TimeoutError, OSError,
                    json.JSONDecodeError) as exc:
                last_error = exc
                continue
            if "text" not in payload:
                raise LlmError(
                    f"response from {self.endpoint} has no 'text' field")
            return str(payload["text"])
        raise LlmError(
            f"no response from {self.endpoint} after "
            f"{self.retries + 1} attempts: {last_error}")
