"""Board schema: square definitions, rent tables, card decks, bank constants."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

PURCHASABLE_KINDS = ("real-estate", "railroad", "utility")
SQUARE_KINDS = PURCHASABLE_KINDS + ("tax", "card", "go", "jail", "go-to-jail", "free-parking")
CARD_EFFECTS = ("move-to", "move-nearest", "move-relative", "cash", "repairs", "go-to-jail", "jail-card")


class SchemaError(ValueError):
    """Raised when a schema document is malformed or violates a board invariant."""


@dataclass(frozen=True)
class Square:
    index: int
    name: str
    kind: str
    group: str | None = None
    price: int = 0
    rents: tuple[int, ...] = ()      # real estate: [base, 1..4 houses, hotel]
    improvement_cost: int = 0
    tax_amount: int = 0
    deck: str | None = None


@dataclass(frozen=True)
class Card:
    text: str
    effect: str
    amount: int = 0
    per_player: bool = False
    target: int = 0
    target_kind: str | None = None
    offset: int = 0
    per_house: int = 0
    per_hotel: int = 0
    collect_go: bool = False


@dataclass(frozen=True)
class GameSchema:
    name: str
    schema_version: int
    starting_cash: int
    go_salary: int
    jail_fine: int
    jail_square: int
    squares: tuple[Square, ...]
    railroad_rents: tuple[int, ...]
    utility_multipliers: tuple[int, ...]
    decks: dict[str, tuple[Card, ...]]

    # Derived lookups, filled in by __post_init__.
    property_squares: tuple[int, ...] = field(default=(), compare=False)
    square_to_property: dict[int, int] = field(default_factory=dict, compare=False)
    real_estate_ids: tuple[int, ...] = field(default=(), compare=False)
    property_to_real_estate: dict[int, int] = field(default_factory=dict, compare=False)
    railroad_ids: tuple[int, ...] = field(default=(), compare=False)
    utility_ids: tuple[int, ...] = field(default=(), compare=False)
    color_groups: dict[str, tuple[int, ...]] = field(default_factory=dict, compare=False)
    group_of: dict[int, str] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        props = [sq.index for sq in self.squares if sq.kind in PURCHASABLE_KINDS]
        object.__setattr__(self, "property_squares", tuple(props))
        object.__setattr__(self, "square_to_property", {sq: i for i, sq in enumerate(props)})
        re_ids, rr_ids, ut_ids = [], [], []
        groups: dict[str, list[int]] = {}
        group_of: dict[int, str] = {}
        for pid, sq_index in enumerate(props):
            sq = self.squares[sq_index]
            if sq.kind == "real-estate":
                re_ids.append(pid)
                groups.setdefault(sq.group, []).append(pid)
                group_of[pid] = sq.group
            elif sq.kind == "railroad":
                rr_ids.append(pid)
            else:
                ut_ids.append(pid)
        object.__setattr__(self, "real_estate_ids", tuple(re_ids))
        object.__setattr__(self, "property_to_real_estate", {p: i for i, p in enumerate(re_ids)})
        object.__setattr__(self, "railroad_ids", tuple(rr_ids))
        object.__setattr__(self, "utility_ids", tuple(ut_ids))
        object.__setattr__(self, "color_groups", {g: tuple(v) for g, v in groups.items()})
        object.__setattr__(self, "group_of", group_of)

    # -- property-id helpers (property ids index the purchasable squares in board order) --

    def square_of(self, prop_id: int) -> Square:
        return self.squares[self.property_squares[prop_id]]

    def price_of(self, prop_id: int) -> int:
        return self.square_of(prop_id).price

    def mortgage_value(self, prop_id: int) -> int:
        return self.price_of(prop_id) // 2

    def unmortgage_cost(self, prop_id: int) -> int:
        value = self.mortgage_value(prop_id)
        interest = -(-value // 10)  # 10% interest, rounded up
        return value + interest

    def group_members(self, prop_id: int) -> tuple[int, ...]:
        """Ownership set of a property: its color group, all railroads, or both utilities."""
        group = self.group_of.get(prop_id)
        if group is not None:
            return self.color_groups[group]
        if prop_id in self.railroad_ids:
            return self.railroad_ids
        return self.utility_ids

    @property
    def num_properties(self) -> int:
        return len(self.property_squares)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def load_schema(source: str | Path | dict[str, Any]) -> GameSchema:
    """Parse and validate a schema document (path, JSON text, or parsed dict)."""
    if isinstance(source, dict):
        doc = source
    else:
        text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else str(source)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema is not valid JSON: {exc}") from exc
    return _build_schema(doc)


def load_bundled_schema() -> GameSchema:
    """The standard US board shipped with the package."""
    text = resources.files("monopoly_rl.engine").joinpath("data/standard_us.json").read_text()
    return _build_schema(json.loads(text))


def _build_schema(doc: dict[str, Any]) -> GameSchema:
    _require(isinstance(doc, dict), "schema document must be a JSON object")
    _require("schema_version" in doc, "missing field: schema_version")
    _require(doc.get("schema_version") == 1, f"unsupported schema_version: {doc.get('schema_version')!r}")
    for key in ("starting_cash", "go_salary", "jail_fine", "jail_square", "squares", "decks"):
        _require(key in doc, f"missing field: {key}")

    raw_squares = doc["squares"]
    _require(isinstance(raw_squares, list), "squares must be a list")
    _require(len(raw_squares) == 40, f"board must have exactly 40 squares, got {len(raw_squares)}")

    squares: list[Square] = []
    for i, raw in enumerate(raw_squares):
        kind = raw.get("kind")
        _require(kind in SQUARE_KINDS, f"square {i}: unknown kind {kind!r}")
        name = raw.get("name", f"square {i}")
        if kind == "real-estate":
            _require(bool(raw.get("group")), f"square {i} ({name}): real-estate square missing color group")
            rents = raw.get("rents", [])
            _require(len(rents) == 6, f"square {i} ({name}): rent table must have 6 entries")
            _require(all(r > 0 for r in rents), f"square {i} ({name}): rents must be strictly positive")
            _require(raw.get("price", 0) > 0, f"square {i} ({name}): price must be strictly positive")
            _require(raw.get("improvement_cost", 0) > 0, f"square {i} ({name}): improvement_cost must be strictly positive")
            squares.append(Square(i, name, kind, group=raw["group"], price=raw["price"],
                                  rents=tuple(rents), improvement_cost=raw["improvement_cost"]))
        elif kind in ("railroad", "utility"):
            _require(raw.get("price", 0) > 0, f"square {i} ({name}): price must be strictly positive")
            squares.append(Square(i, name, kind, price=raw["price"]))
        elif kind == "tax":
            _require(raw.get("amount", 0) > 0, f"square {i} ({name}): tax amount must be strictly positive")
            squares.append(Square(i, name, kind, tax_amount=raw["amount"]))
        elif kind == "card":
            _require(raw.get("deck") in ("chance", "community-chest"),
                     f"square {i} ({name}): card square must name a deck")
            squares.append(Square(i, name, kind, deck=raw["deck"]))
        else:
            squares.append(Square(i, name, kind))

    purchasable = [sq for sq in squares if sq.kind in PURCHASABLE_KINDS]
    real_estate = [sq for sq in purchasable if sq.kind == "real-estate"]
    railroads = [sq for sq in purchasable if sq.kind == "railroad"]
    utilities = [sq for sq in purchasable if sq.kind == "utility"]
    _require(len(purchasable) == 28, f"board must have 28 purchasable squares, got {len(purchasable)}")
    _require(len(real_estate) == 22, f"board must have 22 real-estate squares, got {len(real_estate)}")
    _require(len(railroads) == 4, f"board must have 4 railroads, got {len(railroads)}")
    _require(len(utilities) == 2, f"board must have 2 utilities, got {len(utilities)}")

    groups: dict[str, list[int]] = {}
    for sq in real_estate:
        groups.setdefault(sq.group, []).append(sq.index)
    _require(len(groups) == 8, f"real estate must span 8 color groups, got {len(groups)}")
    for group, members in groups.items():
        _require(len(members) in (2, 3), f"color group {group!r} has {len(members)} members, expected 2 or 3")

    jail_square = doc["jail_square"]
    _require(0 <= jail_square < 40 and squares[jail_square].kind == "jail",
             f"jail_square {jail_square} does not point at a jail square")
    _require(doc["starting_cash"] > 0, "starting_cash must be strictly positive")
    _require(doc["go_salary"] > 0, "go_salary must be strictly positive")
    _require(doc["jail_fine"] > 0, "jail_fine must be strictly positive")

    railroad_rents = tuple(doc.get("railroad_rents", ()))
    _require(len(railroad_rents) == 4 and all(r > 0 for r in railroad_rents),
             "railroad_rents must list 4 strictly positive rents")
    utility_multipliers = tuple(doc.get("utility_multipliers", ()))
    _require(len(utility_multipliers) == 2 and all(m > 0 for m in utility_multipliers),
             "utility_multipliers must list 2 strictly positive multipliers")

    decks: dict[str, tuple[Card, ...]] = {}
    raw_decks = doc["decks"]
    for deck_name in ("chance", "community-chest"):
        _require(deck_name in raw_decks, f"missing deck: {deck_name}")
        cards = []
        for j, raw in enumerate(raw_decks[deck_name]):
            effect = raw.get("effect")
            _require(effect in CARD_EFFECTS, f"deck {deck_name} card {j}: unknown effect {effect!r}")
            if effect == "move-to":
                _require(0 <= raw.get("target", -1) < 40, f"deck {deck_name} card {j}: bad move-to target")
            if effect == "move-nearest":
                _require(raw.get("target_kind") in ("railroad", "utility"),
                         f"deck {deck_name} card {j}: bad move-nearest target_kind")
            cards.append(Card(
                text=raw.get("text", ""),
                effect=effect,
                amount=raw.get("amount", 0),
                per_player=raw.get("per_player", False),
                target=raw.get("target", 0),
                target_kind=raw.get("target_kind"),
                offset=raw.get("offset", 0),
                per_house=raw.get("per_house", 0),
                per_hotel=raw.get("per_hotel", 0),
                collect_go=raw.get("collect_go", False),
            ))
        _require(len(cards) > 0, f"deck {deck_name} is empty")
        decks[deck_name] = tuple(cards)

    return GameSchema(
        name=doc.get("name", "unnamed"),
        schema_version=doc["schema_version"],
        starting_cash=doc["starting_cash"],
        go_salary=doc["go_salary"],
        jail_fine=doc["jail_fine"],
        jail_square=jail_square,
        squares=tuple(squares),
        railroad_rents=railroad_rents,
        utility_multipliers=utility_multipliers,
        decks=decks,
    )
