"""Reward signals: dense in-game ratio and the sparse terminal bonus."""

from __future__ import annotations

from ..engine.state import GameState, net_worth

WIN_REWARD = 10.0
LOSS_REWARD = -10.0


def in_game_reward(state: GameState, player: int) -> float:
    """Player's net worth over the sum of the other active players', in [0, 1].

    The raw ratio can exceed 1 when one player dominates; it is clamped to the
    unit interval. A non-positive denominator (everyone else underwater) counts
    as total dominance and returns 1.
    """
    if not state.players[player].active:
        raise ValueError(f"player {player} is not active")
    others = [p.pid for p in state.players if p.active and p.pid != player]
    if not others:
        raise ValueError("in-game reward needs at least two active players")
    denominator = sum(net_worth(state, pid) for pid in others)
    if denominator <= 0:
        return 1.0
    ratio = net_worth(state, player) / denominator
    return min(1.0, max(0.0, ratio))


def terminal_reward(won: bool) -> float:
    return WIN_REWARD if won else LOSS_REWARD
