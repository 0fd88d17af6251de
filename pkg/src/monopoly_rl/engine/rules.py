"""Rules: legality, move application, dice resolution, trades, bankruptcy, phases.

All state mutation funnels through apply_move, so a recorded move sequence
replays a game exactly. Phase bookkeeping (out-of-turn round robin, debt
settlement, turn hand-off) runs inside apply_move as part of the move's effect.
"""

from __future__ import annotations

from typing import Any, Callable, Iterator

import numpy as np

from .moves import (
    ACCEPT_TRADE, BUY_OFFER, BUY_PROPERTY, CONCLUDE, CONCLUDE_MOVE, EXCHANGE_OFFER,
    FREE_MORTGAGE, IMPROVE, MORTGAGE, OFFER_CASH_LEVELS, PAY_JAIL_FINE, SELL_IMPROVEMENT,
    SELL_OFFER, SELL_PROPERTY, SKIP, SKIP_MOVE, USE_JAIL_CARD, Move, offer_cash_amount,
)
from .schema import Card
from .state import (
    BANK, GameState, OFFER_ACCEPTED, OFFER_PENDING, OFFER_REJECTED, OFFER_WITHDRAWN,
    OUT_OF_TURN, POST_ROLL, PRE_ROLL, ProtocolError, TradeOffer, net_worth,
)

Event = dict[str, Any]


class IllegalMoveError(ValueError):
    """A move failed its legality check; the reason is the message."""


# ---------------------------------------------------------------------------
# predicates


def _tradeable(state: GameState, owner: int, prop_id: int) -> bool:
    q = state.properties[prop_id]
    return q.owner == owner and not q.mortgaged and not q.improved


def can_mortgage(state: GameState, actor: int, prop_id: int) -> bool:
    q = state.properties[prop_id]
    return q.owner == actor and not q.mortgaged and not q.improved


def can_free_mortgage(state: GameState, actor: int, prop_id: int) -> bool:
    q = state.properties[prop_id]
    return q.owner == actor and q.mortgaged and \
        state.players[actor].cash >= state.schema.unmortgage_cost(prop_id)


def can_sell_property(state: GameState, actor: int, prop_id: int) -> bool:
    q = state.properties[prop_id]
    return q.owner == actor and not q.mortgaged and not q.improved


def can_improve(state: GameState, actor: int, prop_id: int, hotel: bool) -> bool:
    schema = state.schema
    if prop_id not in schema.property_to_real_estate:
        return False
    q = state.properties[prop_id]
    if q.owner != actor or q.mortgaged:
        return False
    members = schema.group_members(prop_id)
    props = state.properties
    for m in members:
        if props[m].owner != actor or props[m].mortgaged:
            return False
    if state.players[actor].cash < schema.square_of(prop_id).improvement_cost:
        return False
    min_level = min(props[m].level for m in members)
    if hotel:
        return q.houses == 4 and min_level >= 4
    return not q.hotel and q.houses < 4 and q.houses == min_level


def can_sell_improvement(state: GameState, actor: int, prop_id: int, hotel: bool) -> bool:
    schema = state.schema
    if prop_id not in schema.property_to_real_estate:
        return False
    q = state.properties[prop_id]
    if q.owner != actor:
        return False
    if hotel:
        return q.hotel
    if q.houses < 1:
        return False
    # Sell from the tallest property among the group members this player holds.
    max_owned = max(state.properties[m].level for m in schema.group_members(prop_id)
                    if state.properties[m].owner == actor)
    return q.houses == max_owned


def can_accept_trade(state: GameState, actor: int) -> bool:
    offer = state.pending_offers.get(actor)
    if offer is None:
        return False
    return state.players[actor].cash >= offer.cash_requested and \
        state.players[offer.from_player].cash >= offer.cash_offered


def buyable_square_property(state: GameState, actor: int) -> int | None:
    """Property id the actor stands on, if bank-owned and affordable; else None."""
    player = state.players[actor]
    prop_id = state.schema.square_to_property.get(player.position)
    if prop_id is None:
        return None
    if state.properties[prop_id].owner != BANK:
        return None
    if player.cash < state.schema.price_of(prop_id):
        return None
    return prop_id


def _offer_recipients(state: GameState, actor: int) -> list[int]:
    """Eligible trade recipients in rotated seat order (active, slot free)."""
    return [pid for pid in state.rotation_from(actor)[1:]
            if state.players[pid].active and pid not in state.pending_offers]


def _own_tradeable(state: GameState, actor: int) -> list[int]:
    return sorted(p for p in state.players[actor].owned if _tradeable(state, actor, p))


# ---------------------------------------------------------------------------
# legal move enumeration


def _raising_moves(state: GameState, actor: int) -> Iterator[Move]:
    """Cash-raising moves offered during debt settlement, in board order."""
    for prop_id in sorted(state.players[actor].owned):
        if can_sell_improvement(state, actor, prop_id, hotel=True):
            yield Move(SELL_IMPROVEMENT, prop=prop_id, hotel=True)
        if can_sell_improvement(state, actor, prop_id, hotel=False):
            yield Move(SELL_IMPROVEMENT, prop=prop_id, hotel=False)
        if can_mortgage(state, actor, prop_id):
            yield Move(MORTGAGE, prop=prop_id)
        if can_sell_property(state, actor, prop_id):
            yield Move(SELL_PROPERTY, prop=prop_id)


def legal_moves(state: GameState, actor: int) -> list[Move]:
    """Every legal move for the entitled actor, deterministically ordered."""
    if state.game_over:
        raise ProtocolError("game is over")
    if actor != state.entitled_player():
        raise ProtocolError(f"player {actor} is not entitled to act")

    if state.settling:
        return list(_raising_moves(state, actor))

    phase = state.phase
    moves: list[Move] = []
    player = state.players[actor]

    if phase in (PRE_ROLL, OUT_OF_TURN):
        recipients = _offer_recipients(state, actor)
        own = _own_tradeable(state, actor)
        for to in recipients:
            theirs = _own_tradeable(state, to)
            for o in own:
                for q in theirs:
                    moves.append(Move(EXCHANGE_OFFER, to_player=to, prop=o, prop2=q))
        for to in recipients:
            for o in own:
                price = state.schema.price_of(o)
                for level in OFFER_CASH_LEVELS:
                    moves.append(Move(SELL_OFFER, to_player=to, prop=o,
                                      cash=offer_cash_amount(price, level)))
        for to in recipients:
            for q in _own_tradeable(state, to):
                price = state.schema.price_of(q)
                for level in OFFER_CASH_LEVELS:
                    cash = offer_cash_amount(price, level)
                    if player.cash >= cash:
                        moves.append(Move(BUY_OFFER, to_player=to, prop=q, cash=cash))
        for prop_id, hotel in sorted(_improve_options(state, actor)):
            moves.append(Move(IMPROVE, prop=prop_id, hotel=hotel))

    for prop_id in sorted(player.owned):
        if can_sell_improvement(state, actor, prop_id, hotel=False):
            moves.append(Move(SELL_IMPROVEMENT, prop=prop_id, hotel=False))
        if can_sell_improvement(state, actor, prop_id, hotel=True):
            moves.append(Move(SELL_IMPROVEMENT, prop=prop_id, hotel=True))
        if can_sell_property(state, actor, prop_id):
            moves.append(Move(SELL_PROPERTY, prop=prop_id))
        if can_mortgage(state, actor, prop_id):
            moves.append(Move(MORTGAGE, prop=prop_id))
        if can_free_mortgage(state, actor, prop_id):
            moves.append(Move(FREE_MORTGAGE, prop=prop_id))

    moves.append(SKIP_MOVE)
    moves.append(CONCLUDE_MOVE)

    if phase == PRE_ROLL:
        if player.in_jail and player.jail_card_count > 0:
            moves.append(Move(USE_JAIL_CARD))
        if player.in_jail and player.cash >= state.schema.jail_fine:
            moves.append(Move(PAY_JAIL_FINE))
    if phase in (PRE_ROLL, OUT_OF_TURN) and can_accept_trade(state, actor):
        moves.append(Move(ACCEPT_TRADE))
    if phase == POST_ROLL:
        prop_id = buyable_square_property(state, actor)
        if prop_id is not None:
            moves.append(Move(BUY_PROPERTY, prop=prop_id))

    return moves


def validate_move(state: GameState, actor: int, move: Move) -> str | None:
    """None if legal, else a short reason. Mirrors legal_moves without enumerating."""
    if state.game_over:
        return "game is over"
    if actor != state.entitled_player():
        return f"player {actor} is not entitled to act"
    kind = move.kind
    phase = state.phase
    player = state.players[actor]

    if state.settling:
        if kind == SELL_IMPROVEMENT and can_sell_improvement(state, actor, move.prop, move.hotel):
            return None
        if kind == MORTGAGE and can_mortgage(state, actor, move.prop):
            return None
        if kind == SELL_PROPERTY and can_sell_property(state, actor, move.prop):
            return None
        return "only cash-raising moves are allowed while settling debt"

    if kind in (SKIP, CONCLUDE):
        return None
    if kind == USE_JAIL_CARD:
        if phase != PRE_ROLL:
            return "jail card only in pre-roll"
        if not player.in_jail or player.jail_card_count < 1:
            return "no jail card to use"
        return None
    if kind == PAY_JAIL_FINE:
        if phase != PRE_ROLL:
            return "jail fine only in pre-roll"
        if not player.in_jail:
            return "not in jail"
        if player.cash < state.schema.jail_fine:
            return "cannot afford the jail fine"
        return None
    if kind == ACCEPT_TRADE:
        if phase not in (PRE_ROLL, OUT_OF_TURN):
            return "trades resolve in pre-roll or out-of-turn"
        if actor not in state.pending_offers:
            return "no pending offer"
        if not can_accept_trade(state, actor):
            return "offer is not currently payable"
        return None
    if kind == BUY_PROPERTY:
        if phase != POST_ROLL:
            return "buying happens in post-roll"
        prop_id = buyable_square_property(state, actor)
        if prop_id is None:
            return "no affordable bank-owned property here"
        if move.prop not in (-1, prop_id):
            return "buy-property names a different square"
        return None
    if kind == IMPROVE:
        if phase not in (PRE_ROLL, OUT_OF_TURN):
            return "improvements happen in pre-roll or out-of-turn"
        if not can_improve(state, actor, move.prop, move.hotel):
            return "improvement not allowed on that property"
        return None
    if kind == SELL_IMPROVEMENT:
        if not can_sell_improvement(state, actor, move.prop, move.hotel):
            return "no such improvement to sell"
        return None
    if kind == SELL_PROPERTY:
        if not can_sell_property(state, actor, move.prop):
            return "property cannot be sold"
        return None
    if kind == MORTGAGE:
        if not can_mortgage(state, actor, move.prop):
            return "property cannot be mortgaged"
        return None
    if kind == FREE_MORTGAGE:
        if not can_free_mortgage(state, actor, move.prop):
            return "property cannot be unmortgaged"
        return None
    if kind in (EXCHANGE_OFFER, SELL_OFFER, BUY_OFFER):
        if phase not in (PRE_ROLL, OUT_OF_TURN):
            return "offers are made in pre-roll or out-of-turn"
        to = move.to_player
        if to == actor or not (0 <= to < 4) or not state.players[to].active:
            return "bad offer recipient"
        if to in state.pending_offers:
            return "recipient already has a pending offer"
        if kind == EXCHANGE_OFFER:
            if not _tradeable(state, actor, move.prop):
                return "offered property is not tradeable"
            if not _tradeable(state, to, move.prop2):
                return "requested property is not tradeable"
            return None
        if kind == SELL_OFFER:
            if not _tradeable(state, actor, move.prop):
                return "offered property is not tradeable"
            price = state.schema.price_of(move.prop)
            if move.cash not in {offer_cash_amount(price, lv) for lv in OFFER_CASH_LEVELS}:
                return "sell-offer cash must be 0.75/1.0/1.25 of the price"
            return None
        if not _tradeable(state, to, move.prop):
            return "requested property is not tradeable"
        price = state.schema.price_of(move.prop)
        if move.cash not in {offer_cash_amount(price, lv) for lv in OFFER_CASH_LEVELS}:
            return "buy-offer cash must be 0.75/1.0/1.25 of the price"
        if player.cash < move.cash:
            return "cannot afford the offered cash"
        return None
    return f"unknown move kind {kind!r}"


def _improve_options(state: GameState, actor: int) -> list[tuple[int, bool]]:
    """(prop, hotel) build options; evaluates each fully-owned group once."""
    options: list[tuple[int, bool]] = []
    schema = state.schema
    props = state.properties
    cash = state.players[actor].cash
    for group, members in schema.color_groups.items():
        ok = True
        for m in members:
            q = props[m]
            if q.owner != actor or q.mortgaged:
                ok = False
                break
        if not ok:
            continue
        min_level = min(props[m].level for m in members)
        if min_level >= 5:
            continue
        for m in members:
            q = props[m]
            if cash < schema.square_of(m).improvement_cost:
                continue
            if min_level >= 4:
                if q.houses == 4:
                    options.append((m, True))
            elif not q.hotel and q.houses == min_level:
                options.append((m, False))
    return options


def _affordable_levels(cash: int, price: int) -> int:
    n = 0
    if cash >= (price * 3 + 2) // 4:
        n += 1
    if cash >= price:
        n += 1
    if cash >= (price * 5 + 2) // 4:
        n += 1
    return n


def sample_legal_move(state: GameState, actor: int, rng: np.random.Generator) -> Move:
    """Uniform draw from legal_moves without materializing the trade cross products."""
    if state.settling:
        choices = list(_raising_moves(state, actor))
        return choices[int(rng.integers(len(choices)))]

    phase = state.phase
    player = state.players[actor]
    schema = state.schema
    trade_phase = phase != POST_ROLL

    n_exchange = n_sell = n_buy = 0
    recipients: list[int] = []
    own: list[int] = []
    theirs: list[list[int]] = []
    buy_counts: list[int] = []
    improves: list[tuple[int, bool]] = []
    if trade_phase:
        recipients = _offer_recipients(state, actor)
        own = _own_tradeable(state, actor)
        for to in recipients:
            t = _own_tradeable(state, to)
            theirs.append(t)
            n_exchange += len(own) * len(t)
            counts = [_affordable_levels(player.cash, schema.price_of(q)) for q in t]
            buy_counts.append(sum(counts))
        n_sell = len(recipients) * len(own) * 3
        n_buy = sum(buy_counts)
        improves = _improve_options(state, actor)

    singles: list[Move] = []
    for prop_id in sorted(player.owned):
        q = state.properties[prop_id]
        if q.houses > 0 and can_sell_improvement(state, actor, prop_id, hotel=False):
            singles.append(Move(SELL_IMPROVEMENT, prop=prop_id, hotel=False))
        if q.hotel:
            singles.append(Move(SELL_IMPROVEMENT, prop=prop_id, hotel=True))
        if not q.mortgaged and not q.improved:
            singles.append(Move(SELL_PROPERTY, prop=prop_id))
            singles.append(Move(MORTGAGE, prop=prop_id))
        if q.mortgaged and player.cash >= schema.unmortgage_cost(prop_id):
            singles.append(Move(FREE_MORTGAGE, prop=prop_id))
    singles.append(SKIP_MOVE)
    singles.append(CONCLUDE_MOVE)
    if phase == PRE_ROLL and player.in_jail:
        if player.jail_card_count > 0:
            singles.append(Move(USE_JAIL_CARD))
        if player.cash >= schema.jail_fine:
            singles.append(Move(PAY_JAIL_FINE))
    if trade_phase and can_accept_trade(state, actor):
        singles.append(Move(ACCEPT_TRADE))
    if phase == POST_ROLL:
        prop_id = buyable_square_property(state, actor)
        if prop_id is not None:
            singles.append(Move(BUY_PROPERTY, prop=prop_id))

    total = n_exchange + n_sell + n_buy + len(improves) + len(singles)
    pick = int(rng.integers(total))

    if pick < n_exchange:
        for r, t in enumerate(theirs):
            cell = len(own) * len(t)
            if pick < cell:
                o_idx, q_idx = divmod(pick, len(t))
                return Move(EXCHANGE_OFFER, to_player=recipients[r],
                            prop=own[o_idx], prop2=t[q_idx])
            pick -= cell
    pick -= n_exchange
    if pick < n_sell:
        per_recipient = len(own) * 3
        r, rem = divmod(pick, per_recipient)
        o_idx, level = divmod(rem, 3)
        price = schema.price_of(own[o_idx])
        return Move(SELL_OFFER, to_player=recipients[r], prop=own[o_idx],
                    cash=offer_cash_amount(price, level))
    pick -= n_sell
    if pick < n_buy:
        for r, t in enumerate(theirs):
            if pick < buy_counts[r]:
                for q in t:
                    price = schema.price_of(q)
                    n = _affordable_levels(player.cash, price)
                    if pick < n:
                        return Move(BUY_OFFER, to_player=recipients[r], prop=q,
                                    cash=offer_cash_amount(price, pick))
                    pick -= n
            pick -= buy_counts[r]
    pick -= n_buy
    if pick < len(improves):
        prop_id, hotel = improves[pick]
        return Move(IMPROVE, prop=prop_id, hotel=hotel)
    pick -= len(improves)
    return singles[pick]


def count_legal_moves(state: GameState, actor: int) -> int:
    """len(legal_moves(...)) without building the list."""
    if state.settling:
        return sum(1 for _ in _raising_moves(state, actor))
    phase = state.phase
    player = state.players[actor]
    total = 2  # skip + conclude
    if phase in (PRE_ROLL, OUT_OF_TURN):
        recipients = _offer_recipients(state, actor)
        own = _own_tradeable(state, actor)
        for to in recipients:
            theirs = _own_tradeable(state, to)
            total += len(own) * len(theirs)
            total += len(own) * 3
            for q in theirs:
                total += _affordable_levels(player.cash, state.schema.price_of(q))
        total += len(_improve_options(state, actor))
        if can_accept_trade(state, actor):
            total += 1
    if phase == PRE_ROLL and player.in_jail:
        total += 1 if player.jail_card_count > 0 else 0
        total += 1 if player.cash >= state.schema.jail_fine else 0
    for prop_id in player.owned:
        total += 1 if can_sell_improvement(state, actor, prop_id, hotel=False) else 0
        total += 1 if can_sell_improvement(state, actor, prop_id, hotel=True) else 0
        total += 1 if can_sell_property(state, actor, prop_id) else 0
        total += 1 if can_mortgage(state, actor, prop_id) else 0
        total += 1 if can_free_mortgage(state, actor, prop_id) else 0
    if phase == POST_ROLL and buyable_square_property(state, actor) is not None:
        total += 1
    return total


# ---------------------------------------------------------------------------
# mutation helpers


def _transfer(state: GameState, payer: int, payee: int, amount: int,
              reason: str, events: list[Event]) -> None:
    if amount == 0:
        return
    if payer != BANK:
        p = state.players[payer]
        p.cash -= amount
        if p.cash < 0:
            p.last_creditor = payee
    if payee != BANK:
        state.players[payee].cash += amount
    events.append({"type": "cash", "from": payer, "to": payee, "amount": amount, "reason": reason})


def _withdraw_invalid_offers(state: GameState, events: list[Event]) -> None:
    stale = []
    for recipient, offer in state.pending_offers.items():
        ok = state.players[offer.from_player].active and state.players[offer.to_player].active
        if ok and offer.offered >= 0:
            ok = _tradeable(state, offer.from_player, offer.offered)
        if ok and offer.requested >= 0:
            ok = _tradeable(state, offer.to_player, offer.requested)
        if not ok:
            stale.append(recipient)
    for recipient in stale:
        offer = state.pending_offers.pop(recipient)
        offer.status = OFFER_WITHDRAWN
        events.append({"type": "offer-withdrawn", "offer_id": offer.offer_id,
                       "from": offer.from_player, "to": offer.to_player})


def _move_property(state: GameState, prop_id: int, new_owner: int) -> None:
    q = state.properties[prop_id]
    if q.owner != BANK:
        state.players[q.owner].owned.discard(prop_id)
    q.owner = new_owner
    if new_owner == BANK:
        q.mortgaged = False
        q.houses = 0
        q.hotel = False
    else:
        state.players[new_owner].owned.add(prop_id)


def _bankrupt(state: GameState, pid: int, events: list[Event]) -> None:
    player = state.players[pid]
    creditor = player.last_creditor
    if creditor != BANK and not state.players[creditor].active:
        creditor = BANK
    events.append({"type": "bankruptcy", "player": pid, "creditor": creditor})
    for prop_id in sorted(player.owned):
        _move_property(state, prop_id, creditor)  # mortgaged properties transfer as-is
        events.append({"type": "property-transfer", "prop": prop_id, "from": pid,
                       "to": creditor, "reason": "bankruptcy"})
    player.owned.clear()
    for deck_name in player.jail_cards:
        jail_card = next(c for c in state.schema.decks[deck_name] if c.effect == "jail-card")
        state.decks[deck_name].append(jail_card)
    player.jail_cards.clear()
    player.cash = 0
    player.in_jail = False
    player.jail_turns = 0
    player.active = False
    _withdraw_invalid_offers(state, events)
    remaining = state.active_players()
    if len(remaining) == 1:
        state.game_over = True
        state.winner = remaining[0]
        events.append({"type": "game-over", "winner": state.winner, "reason": "last-player-standing"})


def _end_by_cap(state: GameState, events: list[Event]) -> None:
    best = None
    best_nw = None
    for pid in state.turn_order:
        if not state.players[pid].active:
            continue
        nw = net_worth(state, pid)
        if best_nw is None or nw > best_nw:
            best, best_nw = pid, nw
    state.game_over = True
    state.winner = best
    events.append({"type": "game-over", "winner": best, "reason": "turn-cap",
                   "net_worth": best_nw})


# ---------------------------------------------------------------------------
# dice, landing and card resolution


def compute_rent(state: GameState, square_index: int, dice_sum: int) -> int:
    """Rent owed for landing on a square; 0 for bank-owned or mortgaged."""
    schema = state.schema
    prop_id = schema.square_to_property.get(square_index)
    if prop_id is None:
        return 0
    q = state.properties[prop_id]
    if q.owner == BANK or q.mortgaged:
        return 0
    sq = schema.squares[square_index]
    if sq.kind == "real-estate":
        if q.hotel:
            return sq.rents[5]
        if q.houses > 0:
            return sq.rents[q.houses]
        base = sq.rents[0]
        return base * 2 if state.owns_full_group(q.owner, prop_id) else base
    if sq.kind == "railroad":
        count = sum(1 for r in schema.railroad_ids if state.properties[r].owner == q.owner)
        return schema.railroad_rents[count - 1]
    count = sum(1 for u in schema.utility_ids if state.properties[u].owner == q.owner)
    return schema.utility_multipliers[count - 1] * dice_sum


def _collect_salary(state: GameState, pid: int, events: list[Event]) -> None:
    _transfer(state, BANK, pid, state.schema.go_salary, "go-salary", events)


def _send_to_jail(state: GameState, pid: int, events: list[Event]) -> None:
    player = state.players[pid]
    player.position = state.schema.jail_square
    player.in_jail = True
    player.jail_turns = 0
    events.append({"type": "jail", "player": pid})


def _resolve_landing(state: GameState, pid: int, dice_sum: int, events: list[Event]) -> None:
    player = state.players[pid]
    sq = state.schema.squares[player.position]
    events.append({"type": "landed", "player": pid, "square": sq.index, "name": sq.name})
    if sq.kind in ("go", "jail", "free-parking"):
        return
    if sq.kind == "go-to-jail":
        _send_to_jail(state, pid, events)
        return
    if sq.kind == "tax":
        _transfer(state, pid, BANK, sq.tax_amount, "tax", events)
        return
    if sq.kind == "card":
        _draw_card(state, pid, sq.deck, dice_sum, events)
        return
    prop_id = state.schema.square_to_property[sq.index]
    owner = state.properties[prop_id].owner
    if owner in (BANK, pid) or not state.players[owner].active:
        return
    rent = compute_rent(state, sq.index, dice_sum)
    if rent > 0:
        _transfer(state, pid, owner, rent, "rent", events)
        events.append({"type": "rent", "player": pid, "owner": owner,
                       "square": sq.index, "amount": rent})


def _move_player_to(state: GameState, pid: int, target: int, collect_go: bool,
                    dice_sum: int, events: list[Event]) -> None:
    player = state.players[pid]
    wrapped = target <= player.position
    player.position = target
    events.append({"type": "moved", "player": pid, "to": target})
    if collect_go and wrapped:
        _collect_salary(state, pid, events)
    _resolve_landing(state, pid, dice_sum, events)


def _apply_card(state: GameState, pid: int, card: Card, deck_name: str, dice_sum: int,
                events: list[Event]) -> None:
    player = state.players[pid]
    if card.effect == "move-to":
        _move_player_to(state, pid, card.target, card.collect_go, dice_sum, events)
    elif card.effect == "move-nearest":
        for offset in range(1, 41):
            idx = (player.position + offset) % 40
            if state.schema.squares[idx].kind == card.target_kind:
                wrapped = idx < player.position
                player.position = idx
                events.append({"type": "moved", "player": pid, "to": idx})
                if card.collect_go and wrapped:
                    _collect_salary(state, pid, events)
                _resolve_landing(state, pid, dice_sum, events)
                break
    elif card.effect == "move-relative":
        player.position = (player.position + card.offset) % 40
        events.append({"type": "moved", "player": pid, "to": player.position})
        _resolve_landing(state, pid, dice_sum, events)
    elif card.effect == "cash":
        if card.per_player:
            for other in state.players:
                if other.pid == pid or not other.active:
                    continue
                if card.amount > 0:
                    _transfer(state, other.pid, pid, card.amount, "card", events)
                else:
                    _transfer(state, pid, other.pid, -card.amount, "card", events)
        elif card.amount > 0:
            _transfer(state, BANK, pid, card.amount, "card", events)
        else:
            _transfer(state, pid, BANK, -card.amount, "card", events)
    elif card.effect == "repairs":
        cost = 0
        for prop_id in player.owned:
            q = state.properties[prop_id]
            cost += q.houses * card.per_house + (card.per_hotel if q.hotel else 0)
        if cost > 0:
            _transfer(state, pid, BANK, cost, "repairs", events)
    elif card.effect == "go-to-jail":
        _send_to_jail(state, pid, events)
    elif card.effect == "jail-card":
        player.jail_cards.append(deck_name)
        events.append({"type": "jail-card-received", "player": pid})


def _draw_card(state: GameState, pid: int, deck_name: str, dice_sum: int,
               events: list[Event]) -> None:
    deck = state.decks[deck_name]
    if not deck:
        return
    card = deck.pop(0)
    events.append({"type": "card", "player": pid, "deck": deck_name, "text": card.text})
    if card.effect != "jail-card":
        deck.append(card)  # drawn card returns to the bottom
    _apply_card(state, pid, card, deck_name, dice_sum, events)


def _roll_and_resolve(state: GameState, events: list[Event]) -> None:
    pid = state.roller
    player = state.players[pid]
    if player.in_jail:
        # Doubles escapes are out; a jailed player sits the roll out.
        player.jail_turns = min(3, player.jail_turns + 1)
        state.last_dice = None
        events.append({"type": "jailed-turn", "player": pid, "jail_turns": player.jail_turns})
    else:
        dice = state.rng.integers(1, 7, size=2)
        d1, d2 = int(dice[0]), int(dice[1])
        state.last_dice = (d1, d2)
        events.append({"type": "dice", "player": pid, "dice": [d1, d2]})
        old = player.position
        player.position = (old + d1 + d2) % 40
        events.append({"type": "moved", "player": pid, "to": player.position})
        if player.position < old:
            _collect_salary(state, pid, events)
        _resolve_landing(state, pid, d1 + d2, events)
    state.phase = POST_ROLL
    state.phase_actions = 0
    _withdraw_invalid_offers(state, events)


def roll_and_resolve(state: GameState, pid: int) -> tuple[GameState, list[Event]]:
    """Advance the roller through the dice roll into post-roll (out-of-turn must be done)."""
    if state.game_over:
        raise ProtocolError("game is over")
    if pid != state.roller:
        raise ProtocolError(f"player {pid} does not hold the dice")
    if state.phase != OUT_OF_TURN or state.oot_queue:
        raise ProtocolError("roll happens when the out-of-turn phase is exhausted")
    events: list[Event] = []
    _roll_and_resolve(state, events)
    return state, events


# ---------------------------------------------------------------------------
# phase machine


def _begin_dice_turn(state: GameState, events: list[Event]) -> None:
    pid = state.roller
    state.turn_count += 1
    state.dice_turns[pid] += 1
    state.phase = PRE_ROLL
    state.phase_actions = 0
    state.settling = False
    state.last_dice = None
    if state.dice_turns[pid] > state.config.turn_cap:
        _end_by_cap(state, events)
        return
    player = state.players[pid]
    if player.in_jail and player.jail_turns >= 3:
        # Payment is forced after three jailed turns, even into negative cash.
        _transfer(state, pid, BANK, state.schema.jail_fine, "jail-fine-forced", events)
        player.in_jail = False
        player.jail_turns = 0
        events.append({"type": "jail-released", "player": pid, "how": "forced-fine"})


def _finish_dice_turn(state: GameState, events: list[Event]) -> None:
    if state.game_over:
        return
    order = state.rotation_from(state.roller)
    for pid in order[1:]:
        if state.players[pid].active:
            state.roller = pid
            break
    _begin_dice_turn(state, events)


def _has_raising_move(state: GameState, actor: int) -> bool:
    return next(iter(_raising_moves(state, actor)), None) is not None


def _end_post_roll(state: GameState, events: list[Event]) -> None:
    roller = state.players[state.roller]
    if roller.cash >= 0:
        _finish_dice_turn(state, events)
        return
    if not _has_raising_move(state, state.roller):
        _bankrupt(state, state.roller, events)
        if not state.game_over:
            _finish_dice_turn(state, events)
        return
    state.settling = True
    events.append({"type": "settlement-started", "player": state.roller, "cash": roller.cash})


def _enter_out_of_turn(state: GameState, events: list[Event]) -> None:
    queue = [pid for pid in state.rotation_from(state.roller)[1:] if state.players[pid].active]
    if not queue or state.config.oot_rounds <= 0:
        _roll_and_resolve(state, events)
        return
    state.phase = OUT_OF_TURN
    state.oot_queue = queue
    state.oot_pos = 0
    state.oot_round = 0
    state.oot_round_skips = 0


def _advance_out_of_turn(state: GameState, was_skip: bool, events: list[Event]) -> None:
    if was_skip:
        state.oot_round_skips += 1
    state.oot_pos += 1
    if state.oot_pos < len(state.oot_queue):
        return
    all_skipped = state.oot_round_skips == len(state.oot_queue)
    state.oot_round += 1
    if all_skipped or state.oot_round >= state.config.oot_rounds:
        state.oot_queue = []
        _roll_and_resolve(state, events)
    else:
        state.oot_pos = 0
        state.oot_round_skips = 0


# ---------------------------------------------------------------------------
# apply


def apply_move(state: GameState, actor: int, move: Move) -> tuple[GameState, list[Event]]:
    """Validate and apply one move, advancing phases as a side effect.

    Raises IllegalMoveError (with the reason) rather than ignoring bad moves;
    acting out of turn raises ProtocolError.
    """
    if state.game_over:
        raise ProtocolError("game is over")
    if actor != state.entitled_player():
        raise ProtocolError(f"player {actor} is not entitled to act")
    reason = validate_move(state, actor, move)
    if reason is not None:
        raise IllegalMoveError(reason)

    events: list[Event] = []
    kind = move.kind
    player = state.players[actor]
    schema = state.schema

    # Taking any non-accept action in a trade-capable phase rejects a pending offer.
    if kind != ACCEPT_TRADE and state.phase in (PRE_ROLL, OUT_OF_TURN):
        offer = state.pending_offers.pop(actor, None)
        if offer is not None:
            offer.status = OFFER_REJECTED
            events.append({"type": "offer-rejected", "offer_id": offer.offer_id,
                           "from": offer.from_player, "to": actor})

    if kind in (EXCHANGE_OFFER, SELL_OFFER, BUY_OFFER):
        state.offer_seq += 1
        offer = TradeOffer(
            offer_id=state.offer_seq,
            from_player=actor,
            to_player=move.to_player,
            offered=move.prop if kind in (EXCHANGE_OFFER, SELL_OFFER) else -1,
            requested=move.prop2 if kind == EXCHANGE_OFFER else (move.prop if kind == BUY_OFFER else -1),
            cash_offered=move.cash if kind == BUY_OFFER else 0,
            cash_requested=move.cash if kind == SELL_OFFER else 0,
        )
        state.pending_offers[move.to_player] = offer
        events.append({"type": "offer-made", "offer": offer.to_json()})
    elif kind == ACCEPT_TRADE:
        offer = state.pending_offers.pop(actor)
        offer.status = OFFER_ACCEPTED
        if offer.offered >= 0:
            _move_property(state, offer.offered, actor)
            events.append({"type": "property-transfer", "prop": offer.offered,
                           "from": offer.from_player, "to": actor, "reason": "trade"})
        if offer.requested >= 0:
            _move_property(state, offer.requested, offer.from_player)
            events.append({"type": "property-transfer", "prop": offer.requested,
                           "from": actor, "to": offer.from_player, "reason": "trade"})
        if offer.cash_offered:
            _transfer(state, offer.from_player, actor, offer.cash_offered, "trade", events)
        if offer.cash_requested:
            _transfer(state, actor, offer.from_player, offer.cash_requested, "trade", events)
        events.append({"type": "offer-accepted", "offer_id": offer.offer_id,
                       "from": offer.from_player, "to": actor})
        _withdraw_invalid_offers(state, events)
    elif kind == IMPROVE:
        cost = schema.square_of(move.prop).improvement_cost
        _transfer(state, actor, BANK, cost, "improve", events)
        q = state.properties[move.prop]
        if move.hotel:
            q.houses = 0
            q.hotel = True
        else:
            q.houses += 1
        events.append({"type": "improved", "player": actor, "prop": move.prop, "hotel": move.hotel})
        _withdraw_invalid_offers(state, events)
    elif kind == SELL_IMPROVEMENT:
        refund = schema.square_of(move.prop).improvement_cost // 2
        q = state.properties[move.prop]
        if move.hotel:
            q.hotel = False
            q.houses = 4
        else:
            q.houses -= 1
        _transfer(state, BANK, actor, refund, "sell-improvement", events)
        events.append({"type": "improvement-sold", "player": actor, "prop": move.prop,
                       "hotel": move.hotel})
    elif kind == SELL_PROPERTY:
        value = schema.mortgage_value(move.prop)
        _move_property(state, move.prop, BANK)
        _transfer(state, BANK, actor, value, "sell-property", events)
        events.append({"type": "property-sold", "player": actor, "prop": move.prop, "amount": value})
        _withdraw_invalid_offers(state, events)
    elif kind == MORTGAGE:
        state.properties[move.prop].mortgaged = True
        _transfer(state, BANK, actor, schema.mortgage_value(move.prop), "mortgage", events)
        events.append({"type": "mortgaged", "player": actor, "prop": move.prop})
        _withdraw_invalid_offers(state, events)
    elif kind == FREE_MORTGAGE:
        _transfer(state, actor, BANK, schema.unmortgage_cost(move.prop), "free-mortgage", events)
        state.properties[move.prop].mortgaged = False
        events.append({"type": "unmortgaged", "player": actor, "prop": move.prop})
    elif kind == USE_JAIL_CARD:
        deck_name = player.jail_cards.pop(0)
        jail_card = next(c for c in schema.decks[deck_name] if c.effect == "jail-card")
        state.decks[deck_name].append(jail_card)
        player.in_jail = False
        player.jail_turns = 0
        events.append({"type": "jail-released", "player": actor, "how": "card"})
    elif kind == PAY_JAIL_FINE:
        _transfer(state, actor, BANK, schema.jail_fine, "jail-fine", events)
        player.in_jail = False
        player.jail_turns = 0
        events.append({"type": "jail-released", "player": actor, "how": "fine"})
    elif kind == BUY_PROPERTY:
        prop_id = buyable_square_property(state, actor)
        _transfer(state, actor, BANK, schema.price_of(prop_id), "buy-property", events)
        _move_property(state, prop_id, actor)
        events.append({"type": "property-bought", "player": actor, "prop": prop_id})

    # Phase machinery.
    if state.settling:
        if player.cash >= 0:
            state.settling = False
            events.append({"type": "settlement-cleared", "player": actor})
            _finish_dice_turn(state, events)
        elif not _has_raising_move(state, actor):
            _bankrupt(state, actor, events)
            if not state.game_over:
                _finish_dice_turn(state, events)
    elif state.phase == OUT_OF_TURN:
        _advance_out_of_turn(state, kind in (SKIP, CONCLUDE), events)
    else:
        state.phase_actions += 1
        ends_phase = kind in (SKIP, CONCLUDE) or state.phase_actions >= state.config.phase_action_cap
        if ends_phase:
            if state.phase == PRE_ROLL:
                _enter_out_of_turn(state, events)
            else:
                _end_post_roll(state, events)

    return state, events


def settle_debts_or_bankrupt(state: GameState, pid: int,
                             decide: Callable[[GameState, list[Move]], Move] | None = None,
                             ) -> tuple[GameState, list[Event]]:
    """Drive a negative-balance roller through settlement (or bankruptcy) to turn end.

    The optional decide callback picks among cash-raising moves; by default the
    first move in board order is taken.
    """
    if pid != state.roller or state.phase != POST_ROLL:
        raise ProtocolError("settlement happens at the end of the roller's post-roll")
    events: list[Event] = []
    if not state.settling:
        if state.players[pid].cash >= 0:
            raise ProtocolError("player is not in debt")
        _end_post_roll(state, events)
    while state.settling and not state.game_over:
        options = list(_raising_moves(state, pid))
        move = decide(state, options) if decide is not None else options[0]
        _, step_events = apply_move(state, pid, move)
        events.extend(step_events)
    return state, events


# ---------------------------------------------------------------------------
# decision-point loop


class LegalMoves:
    """Lazy view over the legal move set; materializes only when iterated."""

    def __init__(self, state: GameState, actor: int):
        self._state = state
        self.actor = actor
        self._list: list[Move] | None = None

    def all(self) -> list[Move]:
        if self._list is None:
            self._list = legal_moves(self._state, self.actor)
        return self._list

    def __iter__(self) -> Iterator[Move]:
        return iter(self.all())

    def __len__(self) -> int:
        if self._list is not None:
            return len(self._list)
        return count_legal_moves(self._state, self.actor)

    def __contains__(self, move: Move) -> bool:
        return validate_move(self._state, self.actor, move) is None

    def sample(self, rng: np.random.Generator) -> Move:
        return sample_legal_move(self._state, self.actor, rng)


DecideFn = Callable[[GameState, int, LegalMoves], Move]


def step_game(state: GameState, decide: DecideFn) -> tuple[GameState, dict[str, Any]]:
    """Advance exactly one decision point.

    decide(state, actor, legal) returns the chosen move. An illegal choice is
    rejected, the callback re-queried once, then a skip/conclude (or the first
    cash-raising move during settlement) is forced.
    """
    if state.game_over:
        raise ProtocolError("game is over")
    actor = state.entitled_player()
    phase = state.phase
    turn = state.turn_count
    legal = LegalMoves(state, actor)
    move = decide(state, actor, legal)
    forced = False
    try:
        _, events = apply_move(state, actor, move)
    except IllegalMoveError:
        move = decide(state, actor, legal)
        if validate_move(state, actor, move) is not None:
            move = next(iter(_raising_moves(state, actor))) if state.settling else SKIP_MOVE
            forced = True
        _, events = apply_move(state, actor, move)
    record = {"turn": turn, "phase": phase, "actor": actor, "move": move,
              "events": events, "forced": forced}
    return state, record


def run_game(state: GameState, agents: dict[int, Any],
             max_decisions: int | None = None) -> tuple[GameState, list[dict[str, Any]]]:
    """Play a game to completion with per-player agents exposing .decide(obs)."""
    from ..agents.base import Observation

    trace: list[dict[str, Any]] = []

    def decide(st: GameState, actor: int, legal: LegalMoves) -> Move:
        return agents[actor].decide(Observation(state=st, actor=actor, legal=legal))

    while not state.game_over:
        state, record = step_game(state, decide)
        trace.append(record)
        if max_decisions is not None and len(trace) >= max_decisions:
            break
    return state, trace
