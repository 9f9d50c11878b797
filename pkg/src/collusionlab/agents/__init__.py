from .base import Agent, Decision, HistoryView, InfoAccess, Observation
from .qlearning import PriceGrid, QLearningAgent, QMode, QParams, pretrain
from .rule import (ConstantAgent, GrimTriggerAgent, GrimTriggerConfig, PublicSignal, ScriptedAgent,
                   ScriptedPriceAgent, grim_trigger_act, scripted_act)
