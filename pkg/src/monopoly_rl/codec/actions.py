"""Action index <-> Move mapping and the per-index legality mask."""

from __future__ import annotations

import numpy as np

from ..engine import moves as mv
from ..engine.moves import Move, offer_cash_amount
from ..engine.rules import (
    _improve_options, buyable_square_property, can_accept_trade, can_sell_improvement,
)
from ..engine.schema import GameSchema
from ..engine.state import BANK, GameState, OUT_OF_TURN, POST_ROLL, PRE_ROLL
from .layout import LAYOUT, NUM_CASH_LEVELS, NUM_PROPERTIES, NUM_REAL_ESTATE

_EX_PER_RECIPIENT = NUM_PROPERTIES * (NUM_PROPERTIES - 1)
_OFFER_PER_RECIPIENT = NUM_PROPERTIES * NUM_CASH_LEVELS

# requested-property lookup for the exchange block: row o lists all properties but o
_REQUESTED_IDX = np.array(
    [[q for q in range(NUM_PROPERTIES) if q != o] for o in range(NUM_PROPERTIES)],
    dtype=np.int64,
)


class _SchemaTables:
    """Static per-schema arrays used by the mask builder."""

    def __init__(self, schema: GameSchema):
        prices = np.array([schema.price_of(p) for p in range(schema.num_properties)], dtype=np.int64)
        self.prices = prices
        self.offer_amounts = np.stack(
            [np.array([offer_cash_amount(int(p), lv) for p in prices]) for lv in range(3)],
            axis=1,
        )  # (28, 3)
        self.unmortgage_costs = np.array(
            [schema.unmortgage_cost(p) for p in range(schema.num_properties)], dtype=np.int64
        )
        self.real_estate_ids = np.array(schema.real_estate_ids, dtype=np.int64)
        self.re_index_of = {p: i for i, p in enumerate(schema.real_estate_ids)}


_tables_cache: dict[int, _SchemaTables] = {}


def _tables(schema: GameSchema) -> _SchemaTables:
    key = id(schema)
    tables = _tables_cache.get(key)
    if tables is None:
        tables = _SchemaTables(schema)
        _tables_cache[key] = tables
    return tables


def _recipient_slots(state: GameState, actor: int) -> list[int]:
    """The three non-actor seats in rotated turn order (fixed, even if bankrupt)."""
    return state.rotation_from(actor)[1:]


def decode_action(index: int, state: GameState, actor: int) -> Move:
    """Resolve a flat action index into a concrete Move for the actor."""
    block = LAYOUT.block_of(index)
    i = index - block.offset
    name = block.name
    schema = state.schema
    slots = None
    if name in (mv.EXCHANGE_OFFER, mv.SELL_OFFER, mv.BUY_OFFER):
        slots = _recipient_slots(state, actor)

    if name == mv.EXCHANGE_OFFER:
        r, rem = divmod(i, _EX_PER_RECIPIENT)
        offered, q_adj = divmod(rem, NUM_PROPERTIES - 1)
        requested = q_adj + 1 if q_adj >= offered else q_adj
        return Move(mv.EXCHANGE_OFFER, to_player=slots[r], prop=offered, prop2=requested)
    if name == mv.SELL_OFFER:
        r, rem = divmod(i, _OFFER_PER_RECIPIENT)
        prop, level = divmod(rem, NUM_CASH_LEVELS)
        cash = offer_cash_amount(schema.price_of(prop), level)
        return Move(mv.SELL_OFFER, to_player=slots[r], prop=prop, cash=cash)
    if name == mv.BUY_OFFER:
        r, rem = divmod(i, _OFFER_PER_RECIPIENT)
        prop, level = divmod(rem, NUM_CASH_LEVELS)
        cash = offer_cash_amount(schema.price_of(prop), level)
        return Move(mv.BUY_OFFER, to_player=slots[r], prop=prop, cash=cash)
    if name in (mv.IMPROVE, mv.SELL_IMPROVEMENT):
        hotel = i >= NUM_REAL_ESTATE
        prop = schema.real_estate_ids[i % NUM_REAL_ESTATE]
        return Move(name, prop=prop, hotel=hotel)
    if name in (mv.SELL_PROPERTY, mv.MORTGAGE, mv.FREE_MORTGAGE):
        return Move(name, prop=i)
    if name == mv.BUY_PROPERTY:
        prop = state.schema.square_to_property.get(state.players[actor].position, -1)
        return Move(mv.BUY_PROPERTY, prop=prop)
    return Move(name)


def encode_move(move: Move, state: GameState, actor: int) -> int:
    """Inverse of decode_action for moves the layout can represent."""
    kind = move.kind
    offset = LAYOUT.offsets[kind]
    if kind == mv.EXCHANGE_OFFER:
        r = _recipient_slots(state, actor).index(move.to_player)
        q_adj = move.prop2 - 1 if move.prop2 > move.prop else move.prop2
        return offset + r * _EX_PER_RECIPIENT + move.prop * (NUM_PROPERTIES - 1) + q_adj
    if kind in (mv.SELL_OFFER, mv.BUY_OFFER):
        r = _recipient_slots(state, actor).index(move.to_player)
        price = state.schema.price_of(move.prop)
        for level in range(NUM_CASH_LEVELS):
            if offer_cash_amount(price, level) == move.cash:
                return offset + r * _OFFER_PER_RECIPIENT + move.prop * NUM_CASH_LEVELS + level
        raise ValueError(f"cash {move.cash} is not a representable level for price {price}")
    if kind in (mv.IMPROVE, mv.SELL_IMPROVEMENT):
        re_idx = _tables(state.schema).re_index_of[move.prop]
        return offset + (NUM_REAL_ESTATE if move.hotel else 0) + re_idx
    if kind in (mv.SELL_PROPERTY, mv.MORTGAGE, mv.FREE_MORTGAGE):
        return offset + move.prop
    return offset


def legal_mask(state: GameState, actor: int) -> np.ndarray:
    """Boolean legality over the flat action space; mirrors engine legal_moves."""
    mask = np.zeros(LAYOUT.total, dtype=bool)
    schema = state.schema
    tables = _tables(schema)
    player = state.players[actor]
    props = state.properties

    owner = np.fromiter((q.owner for q in props), dtype=np.int64, count=NUM_PROPERTIES)
    mortgaged = np.fromiter((q.mortgaged for q in props), dtype=bool, count=NUM_PROPERTIES)
    improved = np.fromiter((q.improved for q in props), dtype=bool, count=NUM_PROPERTIES)
    clear = ~mortgaged & ~improved
    own_tradeable = (owner == actor) & clear

    if state.settling:
        for prop_id in player.owned:
            if can_sell_improvement(state, actor, prop_id, hotel=False):
                mask[LAYOUT.offsets[mv.SELL_IMPROVEMENT] + tables.re_index_of[prop_id]] = True
            if props[prop_id].hotel:
                mask[LAYOUT.offsets[mv.SELL_IMPROVEMENT] + NUM_REAL_ESTATE + tables.re_index_of[prop_id]] = True
        mask[LAYOUT.offsets[mv.SELL_PROPERTY]:LAYOUT.offsets[mv.SELL_PROPERTY] + NUM_PROPERTIES] = own_tradeable
        mask[LAYOUT.offsets[mv.MORTGAGE]:LAYOUT.offsets[mv.MORTGAGE] + NUM_PROPERTIES] = own_tradeable
        return mask

    phase = state.phase
    trade_phase = phase in (PRE_ROLL, OUT_OF_TURN)

    if trade_phase:
        slots = _recipient_slots(state, actor)
        free = np.array([state.players[pid].active and pid not in state.pending_offers
                         for pid in slots], dtype=bool)
        their = np.stack([(owner == pid) & clear for pid in slots])  # (3, 28)

        exchange = free[:, None, None] & own_tradeable[None, :, None] & their[:, _REQUESTED_IDX]
        o = LAYOUT.offsets[mv.EXCHANGE_OFFER]
        mask[o:o + exchange.size] = exchange.reshape(-1)

        sell = free[:, None, None] & own_tradeable[None, :, None] & np.ones(
            (1, 1, NUM_CASH_LEVELS), dtype=bool)
        o = LAYOUT.offsets[mv.SELL_OFFER]
        mask[o:o + sell.size] = sell.reshape(-1)

        afford = player.cash >= tables.offer_amounts  # (28, 3)
        buy = free[:, None, None] & their[:, :, None] & afford[None, :, :]
        o = LAYOUT.offsets[mv.BUY_OFFER]
        mask[o:o + buy.size] = buy.reshape(-1)

        o = LAYOUT.offsets[mv.IMPROVE]
        for prop_id, hotel in _improve_options(state, actor):
            mask[o + (NUM_REAL_ESTATE if hotel else 0) + tables.re_index_of[prop_id]] = True

        if can_accept_trade(state, actor):
            mask[LAYOUT.offsets[mv.ACCEPT_TRADE]] = True
        if phase == PRE_ROLL and player.in_jail:
            if player.jail_card_count > 0:
                mask[LAYOUT.offsets[mv.USE_JAIL_CARD]] = True
            if player.cash >= schema.jail_fine:
                mask[LAYOUT.offsets[mv.PAY_JAIL_FINE]] = True

    o = LAYOUT.offsets[mv.SELL_IMPROVEMENT]
    for prop_id in player.owned:
        q = props[prop_id]
        if q.houses > 0 and can_sell_improvement(state, actor, prop_id, hotel=False):
            mask[o + tables.re_index_of[prop_id]] = True
        if q.hotel:
            mask[o + NUM_REAL_ESTATE + tables.re_index_of[prop_id]] = True

    mask[LAYOUT.offsets[mv.SELL_PROPERTY]:LAYOUT.offsets[mv.SELL_PROPERTY] + NUM_PROPERTIES] = own_tradeable
    mask[LAYOUT.offsets[mv.MORTGAGE]:LAYOUT.offsets[mv.MORTGAGE] + NUM_PROPERTIES] = own_tradeable
    free_mortgage = (owner == actor) & mortgaged & (player.cash >= tables.unmortgage_costs)
    mask[LAYOUT.offsets[mv.FREE_MORTGAGE]:LAYOUT.offsets[mv.FREE_MORTGAGE] + NUM_PROPERTIES] = free_mortgage

    mask[LAYOUT.offsets[mv.SKIP]] = True
    mask[LAYOUT.offsets[mv.CONCLUDE]] = True
    if phase == POST_ROLL and buyable_square_property(state, actor) is not None:
        mask[LAYOUT.offsets[mv.BUY_PROPERTY]] = True
    return mask
