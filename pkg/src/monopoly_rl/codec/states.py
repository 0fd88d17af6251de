"""State vector encoding: 16 player dims + 224 property dims, rotated to the actor."""

from __future__ import annotations

import numpy as np

from ..engine.state import BANK, GameState

STATE_DIM = 240
_PLAYER_DIMS = 4      # position, cash, in-jail, has-jail-card
_PROP_DIMS = 8        # owner one-hot (4), mortgaged, monopoly, house frac, hotel


def encode_state(state: GameState, perspective: int) -> np.ndarray:
    """240-dim float32 view of the game from one seat.

    The perspective player occupies slot 0; remaining slots follow the turn
    order cyclically, so a single network generalizes across randomized seats.
    Positions normalize by the last square index, cash by the starting stake.
    Bankrupt players encode as zeros.
    """
    schema = state.schema
    vec = np.zeros(STATE_DIM, dtype=np.float32)
    rotation = state.rotation_from(perspective)
    seat_of = {pid: slot for slot, pid in enumerate(rotation)}

    pos_scale = 1.0 / (len(schema.squares) - 1)
    cash_scale = 1.0 / schema.starting_cash
    for slot, pid in enumerate(rotation):
        p = state.players[pid]
        if not p.active:
            continue
        base = slot * _PLAYER_DIMS
        vec[base] = p.position * pos_scale
        vec[base + 1] = p.cash * cash_scale
        vec[base + 2] = 1.0 if p.in_jail else 0.0
        vec[base + 3] = 1.0 if p.jail_cards else 0.0

    base = 4 * _PLAYER_DIMS
    for prop_id in range(schema.num_properties):
        q = state.properties[prop_id]
        off = base + prop_id * _PROP_DIMS
        if q.owner != BANK:
            vec[off + seat_of[q.owner]] = 1.0
            if q.mortgaged:
                vec[off + 4] = 1.0
            members = schema.group_members(prop_id)
            props = state.properties
            if all(props[m].owner == q.owner for m in members):
                vec[off + 5] = 1.0
            if q.houses:
                vec[off + 6] = q.houses * 0.25
            if q.hotel:
                vec[off + 7] = 1.0
    return vec
