from __future__ import annotations

import os
from dataclasses import dataclass

from ...errors import ConfigError, InvalidParameters
from ..base import InfoAccess

LOCAL_ENDPOINT = "http://localhost:8000/v1"


@dataclass(frozen=True)
class BackendConfig:
    """Chat-completion backend settings.

    ``kind`` is ``openai`` for any OpenAI-compatible HTTP endpoint (remote or
    self-hosted); the mock kinds are configured through ``options``.
    """

    kind: str = "openai"
    endpoint: str = LOCAL_ENDPOINT
    model_name: str = "deepseek-ai/DeepSeek-R1-Distill-Qwen-32B"
    api_key_env: str | None = None
    temperature: float = 0.6
    timeout: float = 600.0
    max_retries: int = 2
    backoff: float = 1.0
    options: dict | None = None

    def __post_init__(self):
        if self.max_retries < 0:
            raise InvalidParameters("max_retries must be >= 0")
        if not self.timeout > 0:
            raise InvalidParameters("timeout must be positive")

    def api_key(self) -> str | None:
        """Resolve the key from the named environment variable."""
        if not self.api_key_env:
            return None
        key = os.environ.get(self.api_key_env, "").strip()
        if not key:
            raise ConfigError(f"environment variable {self.api_key_env} is not set "
                              f"(needed for backend {self.endpoint})")
        return key


@dataclass(frozen=True)
class LlmAgentConfig:
    seller_label: str = "Seller 1"
    delta: float = 0.95
    info_access: InfoAccess = InfoAccess.FULL
    history_window: int = 100
    anti_collusion: str | None = None
    backend: BackendConfig = BackendConfig()
    token_cap: int = 5000
    char_budget: int | None = None

    def __post_init__(self):
        if self.history_window < 1:
            raise InvalidParameters("history_window must be >= 1")
        if self.token_cap <= 0:
            raise InvalidParameters("token_cap must be positive")
        if not 0.0 <= self.delta <= 1.0:
            raise InvalidParameters("delta must lie in [0, 1]")
        object.__setattr__(self, "info_access", InfoAccess(self.info_access))
