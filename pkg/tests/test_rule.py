import numpy as np
import pytest
from hypothesis import given, strategies as st

from collusionlab.agents.base import HistoryView, Observation
from collusionlab.agents.rule import (ConstantAgent, GrimTriggerAgent, GrimTriggerConfig, PublicSignal,
                                      ScriptedAgent, ScriptedPriceAgent, expand_segments,
                                      grim_trigger_act, scripted_act)
from collusionlab.engine import AgentSpec, ExperimentSpec, run
from collusionlab.equilibrium import benchmarks
from collusionlab.errors import InvalidParameters, ScriptExhausted
from collusionlab.market import LogitMarketParams, market_outcome

CFG = GrimTriggerConfig(p_collusive=1.9, p_competitive=1.47)


def test_config_validation():
    with pytest.raises(InvalidParameters):
        GrimTriggerConfig(1.4, 1.5)
    with pytest.raises(InvalidParameters):
        GrimTriggerConfig(1.9, 1.5, rho_detect=1.1)


def test_opening_move_is_collusive():
    assert grim_trigger_act(CFG, False, None, None, np.random.default_rng(0)) == (1.9, False)


def test_rival_deviation_at_t5_triggers_from_t6():
    rng = np.random.default_rng(0)
    rival = [1.9] * 5 + [1.7] + [1.9] * 10
    own, trig, path = None, False, []
    for t in range(len(rival)):
        price, trig = grim_trigger_act(CFG, trig, own, [rival[t - 1]] if t else None, rng)
        path.append(price)
        own = price
    assert path[:6] == [1.9] * 6
    assert path[6:] == [1.47] * 10


def test_trigger_is_absorbing():
    rng = np.random.default_rng(0)
    price, trig = grim_trigger_act(CFG, True, 1.9, [1.9], rng)
    assert (price, trig) == (1.47, True)


def test_tolerance_on_path():
    rng = np.random.default_rng(0)
    assert grim_trigger_act(CFG, False, 1.9, [1.9 + 1e-12], rng) == (1.9, False)


def test_geometric_trigger_time():
    cfg = GrimTriggerConfig(1.9, 1.47, rho_detect=0.5)
    rng = np.random.default_rng(2024)
    times = []
    for _ in range(10_000):
        trig, k = False, 0
        while not trig:
            k += 1
            _, trig = grim_trigger_act(cfg, False, 1.9, [1.5], rng)
        times.append(k)
    assert np.mean(times) == pytest.approx(2.0, rel=0.1)


def _grim_spec(periods=1000, **kw):
    b = benchmarks(LogitMarketParams.baseline())
    cfg = GrimTriggerConfig(b["p_monopoly"], b["p_competitive"], **kw)
    agents = [AgentSpec(lambda rng: GrimTriggerAgent(cfg, rng)) for _ in range(2)]
    return ExperimentSpec(LogitMarketParams.baseline(), agents, max_periods=periods,
                          stop_on_convergence=False), cfg


def test_grim_pair_never_leaves_collusive_path():
    spec, cfg = _grim_spec()
    log, _ = run(spec)
    prices = log.prices()
    assert len(prices) == 1000 and np.all(prices == cfg.p_collusive)
    expect = market_outcome(spec.market, [cfg.p_collusive] * 2).profits
    for r in log.records:
        assert np.allclose(r.profits, expect, atol=1e-12)


def test_grim_agent_reacts_to_scripted_deviation():
    cfg = GrimTriggerConfig(1.9, 1.47)
    agents = [AgentSpec(lambda rng: GrimTriggerAgent(cfg, rng)),
              AgentSpec(lambda rng: ScriptedPriceAgent(ScriptedAgent((1.9,) * 4 + (1.6,) + (1.9,))))]
    spec = ExperimentSpec(LogitMarketParams.baseline(), agents, max_periods=12, stop_on_convergence=False)
    log, _ = run(spec)
    p0 = log.prices()[:, 0]
    assert list(p0[:5]) == [1.9] * 5 and list(p0[5:]) == [1.47] * 7


def test_public_signal_is_shared():
    sig = PublicSignal(1.9, [1.0, 1.0], np.random.default_rng(0))
    a = GrimTriggerAgent(CFG, signal=sig)
    b = GrimTriggerAgent(CFG, signal=sig)
    rec_a = Observation(1, 1.9, 0.3, 0.2, (1.7,))
    rec_b = Observation(1, 1.7, 0.3, 0.2, (1.9,))
    assert a.decide(HistoryView(2, 0, 2, (rec_a,))).price == 1.47
    assert b.decide(HistoryView(2, 1, 2, (rec_b,))).price == 1.47
    assert sig.signal(1, [1.9, 1.7]) == "B"
    quiet = PublicSignal(1.9, [0.0, 0.0], np.random.default_rng(0))
    assert quiet.signal(1, [1.9, 1.2]) == "G"


def test_scripted_act():
    s = ScriptedAgent((1.6,))
    assert [scripted_act(s, t) for t in range(5)] == [1.6] * 5
    with pytest.raises(ScriptExhausted):
        scripted_act(ScriptedAgent((1.6, 1.7), hold_last=False), 2)
    with pytest.raises(InvalidParameters):
        ScriptedAgent(())
    with pytest.raises(InvalidParameters):
        ScriptedAgent((1.0, -2.0))


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=50))
def test_replay_reproduces_trajectory(prices):
    s = ScriptedAgent(tuple(prices), hold_last=False)
    assert [scripted_act(s, t) for t in range(len(prices))] == prices


def test_expand_segments():
    assert expand_segments([[1.8, 3]]) == (1.8, 1.8, 1.8)
    assert expand_segments([[[2.5, 2.0], 2], 1.7]) == (2.5, 2.0, 2.5, 2.0, 1.7)


def test_constant_agent():
    assert ConstantAgent(1.5).decide(HistoryView(1, 0, 2)).price == 1.5
    with pytest.raises(InvalidParameters):
        ConstantAgent(0.0)
