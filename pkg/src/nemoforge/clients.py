"""Completion clients: the request shape shared by annotator and model calls.

Frames travel as opaque references (URIs into the montage timeline), so
the toolkit never touches pixel data; a deployment substitutes a client
that resolves the references before calling its endpoint.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Protocol, Sequence

from .errors import RecordValidationError, TransportError

POLICY_BLOCK_MARKER = "[policy-blocked]"


@dataclass(frozen=True)
class FrameRef:
    """A frame sampled at `time` seconds, addressed by an opaque reference."""

    time: float
    image_ref: str


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    frame_refs: tuple[FrameRef, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "frame_refs", tuple(self.frame_refs))
        prev = None
        for ref in self.frame_refs:
            if prev is not None and ref.time < prev:
                raise RecordValidationError(f"frame refs must be time-ordered ({prev} then {ref.time})")
            prev = ref.time


class CompletionClient(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


@dataclass(frozen=True)
class RetryPolicy:
    """Exponential backoff on transport failures only."""

    attempts: int = 3
    base_delay: float = 0.5
    multiplier: float = 2.0


def call_with_retries(
    client: CompletionClient,
    request: CompletionRequest,
    policy: RetryPolicy = RetryPolicy(),
) -> str:
    """Call the client, retrying TransportError up to policy.attempts times."""
    delay = policy.base_delay
    last: TransportError | None = None
    for attempt in range(policy.attempts):
        try:
            return client.complete(request)
        except TransportError as exc:
            last = exc
            if attempt + 1 < policy.attempts and delay > 0:
                time.sleep(delay)
                delay *= policy.multiplier
    assert last is not None
    raise last


def frame_refs_for(montage_id: str, times: Sequence[float]) -> tuple[FrameRef, ...]:
    """Mint frame references into a montage's timeline."""
    return tuple(FrameRef(time=t, image_ref=f"frame://{montage_id}/{t}") for t in times)


class HttpCompletionClient:
    """Minimal JSON-over-HTTP client: POST {prompt, frames, metadata} -> {text}.

    Network failures and 5xx responses raise TransportError; a policy
    block is surfaced as the POLICY_BLOCK_MARKER text so downstream
    refusal detection catches it.
    """

    def __init__(self, endpoint: str, model: str = "", token: str = "", timeout: float = 120.0):
        self.endpoint = endpoint
        self.model = model
        self.token = token
        self.timeout = timeout

    def complete(self, request: CompletionRequest) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        payload: dict[str, Any] = {
            "prompt": request.prompt,
            "frames": [{"time": fr.time, "image_ref": fr.image_ref} for fr in request.frame_refs],
            "metadata": request.metadata,
        }
        if self.model:
            payload["model"] = self.model
        try:
            resp = requests.post(self.endpoint, json=payload, headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"request to {self.endpoint} failed: {exc}") from exc
        if resp.status_code >= 500:
            raise TransportError(f"{self.endpoint} answered {resp.status_code}")
        if resp.status_code == 451 or resp.status_code == 403:
            return POLICY_BLOCK_MARKER
        if resp.status_code != 200:
            raise TransportError(f"{self.endpoint} answered {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["text"]
        except (ValueError, KeyError) as exc:
            raise TransportError(f"{self.endpoint} answered malformed JSON: {exc}") from exc
