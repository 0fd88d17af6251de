"""Agent callback interface shared by the engine, trainer and harness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ..engine.moves import Move
from ..engine.rules import LegalMoves
from ..engine.state import GameState


@dataclass(slots=True)
class Observation:
    """What an agent sees at its decision point: the open-information game."""

    state: GameState
    actor: int
    legal: LegalMoves


class Agent(Protocol):
    def decide(self, obs: Observation) -> Move: ...


class RandomAgent:
    """Uniform choice over the legal move set."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def decide(self, obs: Observation) -> Move:
        return obs.legal.sample(self.rng)
