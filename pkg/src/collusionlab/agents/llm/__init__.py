from .agent import LlmAgent
from .backends import (OpenAIChatBackend, PricePathBackend, QueryResult, ReplayBackend, RuleBackend,
                       ScriptedBackend, make_backend, query)
from .config import BackendConfig, LlmAgentConfig
from .parsing import ParsedResponse, format_response, parse_response
from .prompts import (DEFAULT_ANTI_COLLUSION, PromptContext, build_one_shot_bertrand_prompt,
                      build_one_shot_monopoly_prompt, build_repeated_monopoly_prompt,
                      build_repeated_prompt, window_slice)
