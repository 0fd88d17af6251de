"""Game state: players, property holdings, pending trades, phase bookkeeping."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from ..rng import STREAM_GAME, derive_rng
from .schema import Card, GameSchema

BANK = -1

PRE_ROLL = "pre-roll"
OUT_OF_TURN = "out-of-turn"
POST_ROLL = "post-roll"

OFFER_PENDING = "pending"
OFFER_ACCEPTED = "accepted"
OFFER_REJECTED = "rejected"
OFFER_WITHDRAWN = "withdrawn"


class ProtocolError(RuntimeError):
    """Raised when the engine is driven out of protocol (wrong actor, game over, ...)."""


@dataclass(slots=True)
class RulesConfig:
    """Engine knobs that are not part of the board schema."""

    turn_cap: int = 100          # dice turns per player; at the cap the richest player wins
    oot_rounds: int = 2          # full out-of-turn round-robin rounds per dice turn
    phase_action_cap: int = 20   # pre/post-roll actions before a conclude is forced


@dataclass(slots=True)
class PlayerState:
    pid: int
    cash: int
    position: int = 0
    in_jail: bool = False
    jail_turns: int = 0
    jail_cards: list[str] = field(default_factory=list)  # deck each held card returns to
    owned: set[int] = field(default_factory=set)         # property ids
    active: bool = True
    last_creditor: int = BANK    # who the most recent cash-negative payment was owed to

    @property
    def jail_card_count(self) -> int:
        return len(self.jail_cards)


@dataclass(slots=True)
class PropertyState:
    owner: int = BANK
    mortgaged: bool = False
    houses: int = 0
    hotel: bool = False

    @property
    def level(self) -> int:
        """Improvement level: 0-4 houses, 5 for a hotel."""
        return 5 if self.hotel else self.houses

    @property
    def improved(self) -> bool:
        return self.hotel or self.houses > 0


@dataclass(slots=True)
class TradeOffer:
    offer_id: int
    from_player: int
    to_player: int
    offered: int = -1       # property id, -1 if none
    requested: int = -1
    cash_offered: int = 0
    cash_requested: int = 0
    status: str = OFFER_PENDING

    def to_json(self) -> dict[str, Any]:
        return {
            "offer_id": self.offer_id,
            "from_player": self.from_player,
            "to_player": self.to_player,
            "offered": self.offered,
            "requested": self.requested,
            "cash_offered": self.cash_offered,
            "cash_requested": self.cash_requested,
            "status": self.status,
        }


@dataclass(slots=True)
class GameState:
    schema: GameSchema
    config: RulesConfig
    seed: int
    turn_order: tuple[int, ...]
    rng: np.random.Generator
    players: list[PlayerState]
    properties: list[PropertyState]
    decks: dict[str, list[Card]]
    pending_offers: dict[int, TradeOffer] = field(default_factory=dict)  # recipient -> offer
    phase: str = PRE_ROLL
    roller: int = 0
    oot_queue: list[int] = field(default_factory=list)
    oot_pos: int = 0
    oot_round: int = 0
    oot_round_skips: int = 0
    phase_actions: int = 0
    settling: bool = False
    last_dice: tuple[int, int] | None = None
    turn_count: int = 0
    dice_turns: list[int] = field(default_factory=lambda: [0, 0, 0, 0])
    offer_seq: int = 0
    game_over: bool = False
    winner: int = -1

    def active_players(self) -> list[int]:
        return [p.pid for p in self.players if p.active]

    def rotation_from(self, pid: int) -> list[int]:
        """Turn order cycled so pid comes first; seat slots stay fixed as players bust."""
        i = self.turn_order.index(pid)
        return [self.turn_order[(i + k) % 4] for k in range(4)]

    def owns_full_group(self, pid: int, prop_id: int) -> bool:
        props = self.properties
        return all(props[m].owner == pid for m in self.schema.group_members(prop_id))

    def monopoly_count(self, pid: int) -> int:
        """Number of real-estate color groups fully owned by pid."""
        count = 0
        props = self.properties
        for members in self.schema.color_groups.values():
            for m in members:
                if props[m].owner != pid:
                    break
            else:
                count += 1
        return count

    def entitled_player(self) -> int:
        """Whose decision point it currently is."""
        if self.game_over:
            raise ProtocolError("game is over")
        if self.phase == OUT_OF_TURN:
            return self.oot_queue[self.oot_pos]
        return self.roller


def new_game(
    schema: GameSchema,
    seed: int,
    turn_order: Iterable[int] = (0, 1, 2, 3),
    config: RulesConfig | None = None,
) -> GameState:
    """Fresh game: everyone on Go with starting cash, bank owns the board."""
    order = tuple(turn_order)
    if sorted(order) != [0, 1, 2, 3]:
        raise ValueError(f"turn_order must be a permutation of 0-3, got {order}")
    config = config or RulesConfig()
    rng = derive_rng(seed, STREAM_GAME)
    decks = {}
    for name, cards in schema.decks.items():
        shuffled = list(cards)
        perm = rng.permutation(len(shuffled))
        decks[name] = [shuffled[i] for i in perm]
    state = GameState(
        schema=schema,
        config=config,
        seed=seed,
        turn_order=order,
        rng=rng,
        players=[PlayerState(pid=i, cash=schema.starting_cash) for i in range(4)],
        properties=[PropertyState() for _ in range(schema.num_properties)],
        decks=decks,
        roller=order[0],
    )
    state.turn_count = 1
    state.dice_turns[state.roller] = 1
    return state


def net_worth(state: GameState, pid: int) -> int:
    """Cash plus the purchase prices of owned properties; 0 once bankrupt.

    Mortgage status and improvements do not enter the valuation.
    """
    player = state.players[pid]
    if not player.active:
        return 0
    total = player.cash
    for prop_id in player.owned:
        total += state.schema.price_of(prop_id)
    return total


def serialize_state(state: GameState) -> dict[str, Any]:
    """Canonical JSON-compatible snapshot (no RNG internals)."""
    return {
        "schema": state.schema.name,
        "turn_order": list(state.turn_order),
        "phase": state.phase,
        "roller": state.roller,
        "settling": state.settling,
        "turn_count": state.turn_count,
        "dice_turns": list(state.dice_turns),
        "game_over": state.game_over,
        "winner": state.winner,
        "players": [
            {
                "pid": p.pid,
                "cash": p.cash,
                "position": p.position,
                "in_jail": p.in_jail,
                "jail_turns": p.jail_turns,
                "jail_cards": p.jail_card_count,
                "owned": sorted(p.owned),
                "active": p.active,
            }
            for p in state.players
        ],
        "properties": [
            {"owner": q.owner, "mortgaged": q.mortgaged, "houses": q.houses, "hotel": q.hotel}
            for q in state.properties
        ],
        "pending_offers": [state.pending_offers[k].to_json() for k in sorted(state.pending_offers)],
    }


def state_hash(state: GameState) -> str:
    blob = json.dumps(serialize_state(state), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def validate_state(state: GameState) -> None:
    """Assert every type invariant; raises AssertionError naming the violation."""
    schema = state.schema
    players = state.players
    properties = state.properties
    owned_total = 0
    for p in players:
        assert 0 <= p.position < 40, f"player {p.pid} position {p.position} out of range"
        assert 0 <= p.jail_turns <= 3, f"player {p.pid} jail_turns {p.jail_turns} out of range"
        if not p.active:
            assert not p.owned, f"bankrupt player {p.pid} still owns property"
        owned_total += len(p.owned)
        for prop_id in p.owned:
            assert properties[prop_id].owner == p.pid, f"ownership mismatch on property {prop_id}"
    owner_count = 0
    for prop_id, q in enumerate(properties):
        houses = q.houses
        hotel = q.hotel
        owner = q.owner
        if owner != BANK:
            owner_count += 1
            assert prop_id in players[owner].owned, f"owner of property {prop_id} does not list it"
        if houses == 0 and not hotel and not q.mortgaged:
            continue
        assert owner != BANK, f"bank-owned property {prop_id} carries state"
        assert 0 <= houses <= 4, f"property {prop_id} house count {houses}"
        if hotel:
            assert houses == 0, f"property {prop_id} has a hotel and houses"
        if hotel or houses > 0:
            sq = schema.square_of(prop_id)
            assert sq.kind == "real-estate", f"improvement on non-real-estate property {prop_id}"
            assert not q.mortgaged, f"improved property {prop_id} is mortgaged"
            assert state.owns_full_group(owner, prop_id), f"improved property {prop_id} outside a monopoly"
    # Per-player sets and per-property owners agree pairwise, so equal sizes
    # mean no property appears in two owned sets.
    assert owned_total == owner_count, "ownership sets and owner fields disagree"
    for recipient, offer in state.pending_offers.items():
        assert offer.status == OFFER_PENDING, "non-pending offer in pending set"
        assert offer.to_player == recipient, "offer filed under wrong recipient"
        assert offer.offered >= 0 or offer.requested >= 0, "offer carries no property"
        assert state.players[offer.from_player].active and state.players[offer.to_player].active, \
            "offer involves a bankrupt player"
        for prop_id, owner in ((offer.offered, offer.from_player), (offer.requested, offer.to_player)):
            if prop_id >= 0:
                q = state.properties[prop_id]
                assert q.owner == owner, f"offer {offer.offer_id} references property {prop_id} not held by its side"
                assert not q.mortgaged and not q.improved, f"offer {offer.offer_id} references encumbered property"
        assert offer.cash_offered >= 0 and offer.cash_requested >= 0, "negative cash in offer"
    if state.game_over:
        assert state.winner in (0, 1, 2, 3), "finished game without a winner"
