"""YAML experiment configs: schema, validation and conversion to specs.

One file describes one condition. Unknown keys are rejected. Secrets are
never stored in the file; a backend names the environment variable that
holds its key.
"""
from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Annotated, Any, Literal, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .agents.base import InfoAccess
from .agents.llm.agent import LlmAgent
from .agents.llm.config import LOCAL_ENDPOINT, BackendConfig, LlmAgentConfig
from .agents.llm.prompts import DEFAULT_ANTI_COLLUSION
from .agents.qlearning import PriceGrid, QLearningAgent, QMode, QParams, load_tables, pretrain
from .agents.rule import (ConstantAgent, GrimTriggerAgent, GrimTriggerConfig, ScriptedAgent,
                          ScriptedPriceAgent, expand_segments)
from .engine import AgentSpec, ConvergenceRule, ExperimentSpec
from .errors import ConfigError
from .market import LogitMarketParams

CONFIG_SCHEMA_VERSION = 1

PROFILES = {
    "desk": {"stability_window": 10_000, "cap": 5_000_000},
    "paper": {"stability_window": 100_000, "cap": 1_000_000_000},
}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MarketModel(_Strict):
    a: float = 2.0
    mu: float = 0.25
    a0: float = 0.0
    c: float = 1.0
    n: int = 2


class ConvergenceModel(_Strict):
    window: int = 100
    band: float = 0.05


class BackendModel(_Strict):
    kind: Literal["openai", "scripted", "price_path", "replay"] = "openai"
    endpoint: str = LOCAL_ENDPOINT
    model_name: str = "deepseek-ai/DeepSeek-R1-Distill-Qwen-32B"
    api_key_env: str | None = None
    temperature: float = 0.6
    timeout: float = 600.0
    max_retries: int = 2
    backoff: float = 1.0
    options: dict[str, Any] | None = None


class LlmModel(_Strict):
    kind: Literal["llm"]
    label: str | None = None
    delta: float = 0.95
    info_access: InfoAccess = InfoAccess.FULL
    history_window: int = 100
    anti_collusion: bool | str | None = None
    token_cap: int = 5000
    char_budget: int | None = None
    monopoly: bool = False
    backend: BackendModel = BackendModel()


class QGridModel(_Strict):
    m: int = 15
    xi: float = 0.1


class QModel(_Strict):
    kind: Literal["qlearning"]
    label: str | None = None
    mode: QMode = QMode.FROZEN
    table: str | None = None
    seller: int = 0
    pretrain_seed: int = 0
    continue_clock: bool = False
    alpha: float = 0.15
    beta: float = 0.004
    delta: float = 0.95
    grid: QGridModel = QGridModel()


class GrimModel(_Strict):
    kind: Literal["grim_trigger"]
    label: str | None = None
    p_collusive: float
    p_competitive: float
    rho_detect: float = 1.0


class ConstantModel(_Strict):
    kind: Literal["constant"]
    label: str | None = None
    price: float


class ScriptedModel(_Strict):
    kind: Literal["scripted"]
    label: str | None = None
    prices: list[float] | None = None
    segments: list[Any] | None = None
    hold_last: bool = True


AgentModel = Annotated[Union[LlmModel, QModel, GrimModel, ConstantModel, ScriptedModel],
                       Field(discriminator="kind")]


class ExperimentModel(_Strict):
    schema_version: int = CONFIG_SCHEMA_VERSION
    name: str = "condition"
    market: MarketModel = MarketModel()
    agents: list[AgentModel]
    max_periods: int = 1000
    convergence: ConvergenceModel = ConvergenceModel()
    stop_on_convergence: bool = True
    runs: int = 1
    seed: int = 0
    output_dir: str | None = None
    agent_threads: int = 1


def parse_config(data: dict) -> ExperimentModel:
    try:
        model = ExperimentModel.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    if model.schema_version != CONFIG_SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema_version {model.schema_version}")
    if len(model.agents) != model.market.n:
        raise ConfigError(f"{len(model.agents)} agents configured for n={model.market.n}")
    return model


def load_config(path) -> ExperimentModel:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    model = parse_config(data)
    # relative table and log paths are resolved against the config's folder
    for a in model.agents:
        if isinstance(a, QModel) and a.table and not Path(a.table).is_absolute():
            a.table = str(path.parent / a.table)
    return model


def canonical_yaml(model: ExperimentModel) -> str:
    """Stable serialisation: every field, defaults included, in schema order."""
    return yaml.safe_dump(model.model_dump(mode="json"), sort_keys=False, allow_unicode=True)


def _labels(model: ExperimentModel) -> list[str]:
    return [a.label or f"Seller {i + 1}" for i, a in enumerate(model.agents)]


def _backend_config(b: BackendModel) -> BackendConfig:
    return BackendConfig(**b.model_dump())


def llm_config(a: LlmModel, label: str) -> LlmAgentConfig:
    anti = DEFAULT_ANTI_COLLUSION if a.anti_collusion is True else (a.anti_collusion or None)
    return LlmAgentConfig(seller_label=label, delta=a.delta, info_access=a.info_access,
                          history_window=a.history_window, anti_collusion=anti,
                          backend=_backend_config(a.backend), token_cap=a.token_cap,
                          char_budget=a.char_budget)


@lru_cache(maxsize=16)
def _pretrained(market: LogitMarketParams, m: int, xi: float, alpha: float, beta: float,
                delta: float, seed: int, stability_window: int, cap: int):
    from .equilibrium import benchmarks
    b = benchmarks(market.with_n(2))
    params = QParams(PriceGrid.around(b["p_competitive"], b["p_monopoly"], m, xi), alpha, beta, delta)
    return pretrain(params, market.with_n(2), stability_window, cap, seed)


def q_tables(a: QModel, market: LogitMarketParams, profile: str = "desk"):
    if a.table:
        return load_tables(a.table)
    prof = PROFILES[profile]
    return _pretrained(market, a.grid.m, a.grid.xi, a.alpha, a.beta, a.delta, a.pretrain_seed,
                       prof["stability_window"], prof["cap"])


def build_spec(model: ExperimentModel, runs: int | None = None, seed: int | None = None,
               output_dir=None, profile: str = "desk") -> ExperimentSpec:
    """Turn a validated config into an engine spec.

    Backends are instantiated once here so a missing API key fails before
    any period runs.
    """
    market = LogitMarketParams(**model.market.model_dump())
    labels = _labels(model)
    agents = []
    for i, a in enumerate(model.agents):
        agents.append(AgentSpec(factory=_factory(a, i, labels, market, profile), label=labels[i],
                                meta=a.model_dump(mode="json")))
    return ExperimentSpec(market=market, agents=agents, max_periods=model.max_periods,
                          convergence=ConvergenceRule(**model.convergence.model_dump()),
                          runs=model.runs if runs is None else runs,
                          seed=model.seed if seed is None else seed,
                          output_dir=output_dir if output_dir is not None else model.output_dir,
                          name=model.name, stop_on_convergence=model.stop_on_convergence,
                          agent_threads=model.agent_threads, meta={"profile": profile})


def _factory(a, i: int, labels: list[str], market: LogitMarketParams, profile: str):
    label = labels[i]
    if isinstance(a, LlmModel):
        cfg = llm_config(a, label)
        cfg.backend.api_key()  # fail fast on a missing secret
        rivals = tuple(l for k, l in enumerate(labels) if k != i)
        return lambda rng: LlmAgent(cfg, market.c, rival_labels=rivals, monopoly=a.monopoly)
    if isinstance(a, QModel):
        res = q_tables(a, market, profile)
        table = res.tables[a.seller]
        clock = res.periods if a.continue_clock else 0
        from .equilibrium import nash_logit
        p0 = nash_logit(market).price
        return lambda rng: QLearningAgent(table, res.params, a.mode, rng, initial_price=p0,
                                          continue_clock_from=clock, label=label)
    if isinstance(a, GrimModel):
        gc = GrimTriggerConfig(a.p_collusive, a.p_competitive, a.rho_detect)
        return lambda rng: GrimTriggerAgent(gc, rng, label=label)
    if isinstance(a, ConstantModel):
        return lambda rng: ConstantAgent(a.price, label=label)
    if isinstance(a, ScriptedModel):
        if (a.prices is None) == (a.segments is None):
            raise ConfigError("scripted agent needs exactly one of prices or segments")
        traj = tuple(a.prices) if a.prices is not None else expand_segments(a.segments)
        script = ScriptedAgent(traj, a.hold_last)
        return lambda rng: ScriptedPriceAgent(script, label=label)
    raise ConfigError(f"unsupported agent {a!r}")


def preset_dir() -> Path:
    return Path(__file__).parent / "presets"


def preset_path(name: str) -> Path:
    p = preset_dir() / (name if name.endswith(".yaml") else name + ".yaml")
    if not p.exists():
        raise ConfigError(f"unknown preset {name!r}")
    return p


def list_presets() -> list[str]:
    return sorted(p.stem for p in preset_dir().glob("*.yaml"))
