#
# File:    ./src/evoagent/backend.py
# Author:  Jiří Kučera <sanczes AT gmail.com>
# Date:    2026-10-19 10:41:13 +0200
# Project: evoagent: Evolutionary agents in an evolving society
#
# SPDX-License-Identifier: MIT
#
"""
Chat-completion backends.

Every model call in the simulation goes through a `Backend`. Remote
providers speak the OpenAI chat-completion wire shape, the scripted backend
answers from a rule table and is what all offline runs and tests use. The
wrappers add budget guarding and a JSONL response cache on top of any
backend.
"""

import hashlib
import json
import os
import pathlib
import threading
import time
from typing import TYPE_CHECKING, Callable, List, Literal, Union

import openai
from pydantic import BaseModel, ConfigDict, Field
from tenacity import (
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from evoagent.assets import asset_path
from evoagent.errors import (
    AuthError,
    BackendError,
    BudgetExceeded,
    CacheIOError,
    ConfigError,
    TransportError,
)
from evoagent.io import StreamsProxyMixin
from evoagent.logging import get_logger

if TYPE_CHECKING:
    from evoagent.config import BackendSpec


class ChatMessage(BaseModel):
    """One message of a chat conversation."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    role: Literal["system", "user", "assistant"]
    content: str = Field(min_length=1)


class CompletionRequest(BaseModel):
    """
    A chat-completion request.

    ``template_id`` names the prompt template the request was rendered from.
    It is routing metadata for scripted rules and never part of the digest.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    messages: List[ChatMessage] = Field(min_length=1)
    temperature: float = Field(default=0.0, ge=0.0)
    max_tokens: int = Field(default=512, gt=0)
    model_tag: str = ""
    template_id: str = ""

    @classmethod
    def of(
        cls,
        user: str,
        system: str = "",
        template_id: str = "",
        temperature: float = 0.0,
        max_tokens: int = 512,
        model_tag: str = "",
    ) -> "CompletionRequest":
        """
        Build a request from a user prompt and an optional system prompt.

        :param user: The user message
        :param system: The system message (omitted when empty)
        :param template_id: The template the prompt was rendered from
        :param temperature: The sampling temperature
        :param max_tokens: The completion token limit
        :param model_tag: The model identifier
        :return: the request
        """
        messages = []
        if system:
            messages.append(ChatMessage(role="system", content=system))
        messages.append(ChatMessage(role="user", content=user))
        return cls(
            messages=messages,
            temperature=temperature,
            max_tokens=max_tokens,
            model_tag=model_tag,
            template_id=template_id,
        )

    def text(self) -> str:
        """
        Get the concatenated contents of all messages.

        :return: the text
        """
        return "\n".join(message.content for message in self.messages)

    def digest(self, include_max_tokens: bool = True) -> str:
        """
        Compute a stable digest of the request.

        :param include_max_tokens: The flag to include ``max_tokens``
        :return: the hex SHA-256 digest

        The digest covers the model tag, the temperature, the messages, and
        (by default) the token limit.
        """
        payload = self.model_dump(
            exclude={"template_id"}
            | (set() if include_max_tokens else {"max_tokens"})
        )
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class CompletionResponse(BaseModel):
    """A chat-completion response."""

    model_config = ConfigDict(frozen=True)

    text: str
    prompt_tokens: int = Field(default=0, ge=0)
    completion_tokens: int = Field(default=0, ge=0)


class Sampling(BaseModel):
    """Sampling parameters a caller attaches to its requests."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    temperature: float = Field(default=0.0, ge=0.0)
    max_tokens: int = Field(default=512, gt=0)
    model_tag: str = ""


DEFAULT_SAMPLING: Sampling = Sampling()


class Backend:
    """Base class of all backends."""

    __slots__ = ()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        """
        Complete the chat.

        :param request: The request
        :return: the response
        :raises NotImplementedError: when not overridden
        """
        raise NotImplementedError


ResponderType = Callable[[CompletionRequest], str]


class ScriptedRule:
    """
    One rule of a scripted backend.

    A pattern starting with ``@`` matches the request template id, any other
    pattern matches as a substring of the request text. The response is
    either a literal text or a pure function of the request.
    """

    __slots__ = ("pattern", "response")

    def __init__(
        self, pattern: str, response: "Union[str, ResponderType]"
    ) -> None:
        """
        Initialize the rule.

        :param pattern: The pattern
        :param response: The response text or responder
        """
        self.pattern: str = pattern
        self.response: "Union[str, ResponderType]" = response

    def matches(self, request: CompletionRequest) -> bool:
        """
        Test whether the rule applies to the request.

        :param request: The request
        :return: `True` if the rule applies
        """
        if self.pattern.startswith("@"):
            return request.template_id == self.pattern[1:]
        return self.pattern in request.text()

    def answer(self, request: CompletionRequest) -> str:
        """
        Produce the rule response.

        :param request: The request
        :return: the response text
        """
        if callable(self.response):
            return self.response(request)
        return self.response


class ScriptedRules:
    """Ordered rule table with a default response."""

    __slots__ = ("rules", "default_response")

    def __init__(
        self,
        rules: "list[ScriptedRule] | None" = None,
        default_response: str = "",
    ) -> None:
        """
        Initialize the table.

        :param rules: The rules, the first matching one wins
        :param default_response: The response used when nothing matches
        """
        self.rules: "list[ScriptedRule]" = list(rules or [])
        self.default_response: str = default_response

    def add(
        self, pattern: str, response: "Union[str, ResponderType]"
    ) -> "ScriptedRules":
        """
        Append a rule.

        :param pattern: The rule pattern
        :param response: The rule response
        :return: this table
        """
        self.rules.append(ScriptedRule(pattern, response))
        return self

    def lookup(self, request: CompletionRequest) -> str:
        """
        Look up the response for the request.

        :param request: The request
        :return: the response text
        """
        for rule in self.rules:
            if rule.matches(request):
                return rule.answer(request)
        return self.default_response

    @classmethod
    def load(cls, path: "pathlib.Path") -> "ScriptedRules":
        """
        Load the table from a JSON file.

        :param path: The path to the file
        :return: the rule table
        :raises ConfigError: when the file is missing or malformed

        The file holds ``{"rules": [{"pattern": ..., "response": ...}],
        "default": ...}``.
        """
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            rules = [
                ScriptedRule(str(item["pattern"]), str(item["response"]))
                for item in data.get("rules", [])
            ]
            return cls(rules, str(data.get("default", "")))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot load scripted rules {path}: {exc}")


class ScriptedBackend(Backend):
    """Deterministic backend answering from a rule table."""

    __slots__ = ("rules",)

    def __init__(self, rules: ScriptedRules) -> None:
        """
        Initialize the backend.

        :param rules: The rule table
        """
        self.rules: ScriptedRules = rules

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        """
        Complete the chat from the rule table.

        :param request: The request
        :return: the response, token counts are whitespace word counts
        """
        text = self.rules.lookup(request).rstrip()
        return CompletionResponse(
            text=text,
            prompt_tokens=len(request.text().split()),
            completion_tokens=len(text.split()),
        )


# provider -> (credential variable, base URL)
PROVIDERS: "dict[str, tuple[str, str | None]]" = {
    "openai": ("OPENAI_API_KEY", None),
    "gemini": (
        "GEMINI_API_KEY",
        "https://generativelanguage.googleapis.com/v1beta/openai/",
    ),
    "together": ("TOGETHER_API_KEY", "https://api.together.xyz/v1"),
    "local": ("EVO_LOCAL_API_KEY", "http://localhost:8000/v1"),
}


class OpenAIBackend(Backend):
    """
    Backend for providers speaking the OpenAI chat-completion API.

    Transport failures (connection errors, timeouts, rate limits, 5xx
    statuses) are retried with exponential back-off; credential and client
    errors are not.
    """

    __slots__ = ("provider", "model", "max_attempts", "backoff", "__client")

    def __init__(
        self,
        provider: str,
        model: str,
        max_attempts: int = 5,
        backoff: float = 1.0,
        timeout: float = 60.0,
    ) -> None:
        """
        Initialize the backend.

        :param provider: The provider name, a key of `PROVIDERS`
        :param model: The model name
        :param max_attempts: The number of attempts per request
        :param backoff: The back-off multiplier in seconds
        :param timeout: The per-request timeout in seconds
        :raises ConfigError: when the provider is unknown
        :raises AuthError: when the credential is missing
        """
        if provider not in PROVIDERS:
            raise ConfigError(f"unknown provider {provider!r}")
        keyvar, base_url = PROVIDERS[provider]
        api_key = os.environ.get(keyvar, "")
        if provider == "local":
            base_url = os.environ.get("EVO_LOCAL_BASE_URL", base_url)
            api_key = api_key or "EMPTY"
        if not api_key:
            raise AuthError(f"set {keyvar} to use the {provider} provider")
        self.provider: str = provider
        self.model: str = model
        self.max_attempts: int = max_attempts
        self.backoff: float = backoff
        self.__client: openai.OpenAI = openai.OpenAI(
            api_key=api_key, base_url=base_url, timeout=timeout, max_retries=0
        )

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        """
        Complete the chat remotely.

        :param request: The request
        :return: the response
        :raises TransportError: when all attempts fail
        :raises AuthError: when the credential is rejected
        :raises BackendError: when the provider rejects the request
        """
        retrying = Retrying(
            stop=stop_after_attempt(self.max_attempts),
            wait=wait_exponential(multiplier=self.backoff, max=60),
            retry=retry_if_exception_type(TransportError),
            reraise=True,
        )
        response: CompletionResponse = retrying(self.__send, request)
        return response

    def __send(self, request: CompletionRequest) -> CompletionResponse:
        """
        Send one attempt of the request.

        :param request: The request
        :return: the response
        :raises TransportError: on a retriable failure
        :raises AuthError: on a credential failure
        :raises BackendError: on a non-retriable failure
        """
        try:
            completion = self.__client.chat.completions.create(
                model=request.model_tag or self.model,
                messages=[
                    {"role": m.role, "content": m.content}
                    for m in request.messages
                ],
                temperature=request.temperature,
                max_tokens=request.max_tokens,
            )
        except (
            openai.AuthenticationError,
            openai.PermissionDeniedError,
        ) as exc:
            raise AuthError(f"{self.provider}: {exc}") from exc
        except (
            openai.APIConnectionError,
            openai.RateLimitError,
            openai.InternalServerError,
        ) as exc:
            get_logger().lwarn(f"{self.provider} transport failure: {exc}\n")
            raise TransportError(f"{self.provider}: {exc}") from exc
        except openai.APIError as exc:
            raise BackendError(f"{self.provider}: {exc}") from exc
        usage = completion.usage
        return CompletionResponse(
            text=(completion.choices[0].message.content or "").rstrip(),
            prompt_tokens=usage.prompt_tokens if usage else 0,
            completion_tokens=usage.completion_tokens if usage else 0,
        )


class InteractiveBackend(Backend, StreamsProxyMixin):
    """
    Backend answered by a human operator on the console.

    Used as a human observer: the operator reads the prompt and types the
    reply (for scoring, the ``### Score: ... ### Feedback: ...`` line).
    """

    __slots__ = ("__lock",)

    def __init__(self) -> None:
        """Initialize the backend."""
        StreamsProxyMixin.__init__(self)
        self.__lock: threading.Lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        """
        Ask the operator.

        :param request: The request
        :return: the typed reply
        """
        shown = "\n\n".join(
            f"[{message.role}]\n{message.content}"
            for message in request.messages
        )
        with self.__lock:
            text = self.ask(f"{shown}\n> ").rstrip()
        return CompletionResponse(
            text=text, completion_tokens=len(text.split())
        )


class BudgetGuard(Backend):
    """Backend wrapper enforcing completion-token and call caps."""

    __slots__ = (
        "inner",
        "max_completion_tokens",
        "max_calls",
        "completion_tokens",
        "calls",
        "__lock",
    )

    def __init__(
        self,
        inner: Backend,
        max_completion_tokens: int = 2_000_000,
        max_calls: "int | None" = None,
    ) -> None:
        """
        Initialize the guard.

        :param inner: The guarded backend
        :param max_completion_tokens: The completion token cap
        :param max_calls: The call cap (`None` for no cap)
        """
        self.inner: Backend = inner
        self.max_completion_tokens: int = max_completion_tokens
        self.max_calls: "int | None" = max_calls
        self.completion_tokens: int = 0
        self.calls: int = 0
        self.__lock: threading.Lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        """
        Complete the chat unless a cap has been hit.

        :param request: The request
        :return: the response
        :raises BudgetExceeded: when a cap has been hit
        """
        with self.__lock:
            if self.completion_tokens >= self.max_completion_tokens:
                raise BudgetExceeded(
                    f"{self.completion_tokens} completion tokens used"
                )
            if self.max_calls is not None and self.calls >= self.max_calls:
                raise BudgetExceeded(f"{self.calls} calls made")
            self.calls += 1
        response = self.inner.complete(request)
        with self.__lock:
            self.completion_tokens += response.completion_tokens
        return response


def budget_guard(
    backend: Backend,
    max_completion_tokens: int = 2_000_000,
    max_calls: "int | None" = None,
) -> BudgetGuard:
    """
    Wrap *backend* with a budget guard.

    :param backend: The backend
    :param max_completion_tokens: The completion token cap
    :param max_calls: The call cap
    :return: the guarded backend
    """
    return BudgetGuard(backend, max_completion_tokens, max_calls)


class CachedBackend(Backend):
    """
    Backend wrapper with an append-only JSONL response cache.

    Each line holds ``digest``, ``request``, ``response``, and
    ``timestamp``. Entries already on disk are loaded on construction.
    """

    __slots__ = ("inner", "path", "include_max_tokens", "__entries", "__lock")

    def __init__(
        self,
        inner: Backend,
        path: "pathlib.Path",
        include_max_tokens: bool = True,
    ) -> None:
        """
        Initialize the cache.

        :param inner: The backend answering cache misses
        :param path: The path to the cache file
        :param include_max_tokens: The flag to key entries by ``max_tokens``
        :raises CacheIOError: when the cache file cannot be read
        """
        self.inner: Backend = inner
        self.path: pathlib.Path = path
        self.include_max_tokens: bool = include_max_tokens
        self.__entries: "dict[str, CompletionResponse]" = {}
        self.__lock: threading.Lock = threading.Lock()
        self.__load()

    def __len__(self) -> int:
        """
        Get the number of cached entries.

        :return: the number of entries
        """
        return len(self.__entries)

    def __load(self) -> None:
        """
        Load entries from the cache file.

        :raises CacheIOError: when the file cannot be read or parsed
        """
        if not self.path.exists():
            return
        try:
            with open(self.path, encoding="utf-8") as stream:
                for line in stream:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    self.__entries[record["digest"]] = (
                        CompletionResponse.model_validate(record["response"])
                    )
        except (OSError, ValueError, KeyError) as exc:
            raise CacheIOError(f"{self.path}: {exc}") from exc

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        """
        Complete the chat, consulting the cache first.

        :param request: The request
        :return: the cached or fresh response
        :raises CacheIOError: when the entry cannot be written
        """
        digest = request.digest(self.include_max_tokens)
        with self.__lock:
            cached = self.__entries.get(digest)
        if cached is not None:
            return cached
        response = self.inner.complete(request)
        record = {
            "digest": digest,
            "request": request.model_dump(exclude={"template_id"}),
            "response": response.model_dump(),
            "timestamp": time.time(),
        }
        line = json.dumps(record, ensure_ascii=False) + "\n"
        with self.__lock:
            if digest in self.__entries:
                return self.__entries[digest]
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, mode="a", encoding="utf-8") as stream:
                    stream.write(line)
            except OSError as exc:
                raise CacheIOError(f"{self.path}: {exc}") from exc
            self.__entries[digest] = response
        return response


def with_cache(
    backend: Backend,
    cache_path: "pathlib.Path",
    include_max_tokens: bool = True,
) -> CachedBackend:
    """
    Wrap *backend* with a response cache.

    :param backend: The backend
    :param cache_path: The path to the JSONL cache file
    :param include_max_tokens: The flag to key entries by ``max_tokens``
    :return: the cached backend
    """
    return CachedBackend(backend, cache_path, include_max_tokens)


class TracingBackend(Backend):
    """
    Backend wrapper recording the calls made through it.

    The runner gives every agent-level task its own tracer, so the recorded
    calls can be committed to the run log in a deterministic order no matter
    how the tasks interleave.
    """

    __slots__ = ("inner", "calls")

    def __init__(self, inner: Backend) -> None:
        """
        Initialize the tracer.

        :param inner: The traced backend
        """
        self.inner: Backend = inner
        self.calls: "list[dict[str, str]]" = []

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        """
        Complete the chat and record the call.

        :param request: The request
        :return: the response
        """
        self.calls.append(
            {"template": request.template_id, "digest": request.digest()}
        )
        return self.inner.complete(request)

    def drain(self) -> "list[dict[str, str]]":
        """
        Take the recorded calls.

        :return: the calls recorded since the last drain
        """
        calls, self.calls = self.calls, []
        return calls


def make_backend(
    spec: "BackendSpec", token_budget: "int | None" = None
) -> Backend:
    """
    Build a backend from its configuration.

    :param spec: The backend configuration
    :param token_budget: The completion token cap (`None` for no guard)
    :return: the backend
    :raises ConfigError: when the provider is unknown

    The cache (when enabled) sits outside the budget guard, so cache hits do
    not consume budget. The cache file lives in ``EVO_CACHE_DIR`` (default
    ``.evoagent-cache``) and is named after the provider and model.
    """
    backend: Backend
    if spec.provider == "scripted":
        rules = (
            ScriptedRules.load(pathlib.Path(spec.rules))
            if spec.rules
            else default_scripted_rules()
        )
        backend = ScriptedBackend(rules)
    elif spec.provider == "interactive":
        backend = InteractiveBackend()
    else:
        backend = OpenAIBackend(
            spec.provider, spec.model, spec.max_attempts, spec.backoff
        )
    if token_budget is not None:
        backend = budget_guard(backend, token_budget)
    if spec.cache:
        cache_dir = pathlib.Path(
            os.environ.get("EVO_CACHE_DIR", ".evoagent-cache")
        )
        name = f"{spec.provider}-{spec.model or 'default'}".replace("/", "_")
        backend = with_cache(backend, cache_dir / f"{name}.jsonl")
    return backend


def default_scripted_rules() -> ScriptedRules:
    """
    Load the packaged scripted rule table.

    :return: the rule table
    """
    return ScriptedRules.load(asset_path("scripted.json"))
