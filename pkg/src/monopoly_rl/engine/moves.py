"""Move types: the 14 concrete player actions and their JSON round-trip."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

EXCHANGE_OFFER = "exchange-offer"
SELL_OFFER = "sell-offer"
BUY_OFFER = "buy-offer"
IMPROVE = "improve"
SELL_IMPROVEMENT = "sell-improvement"
SELL_PROPERTY = "sell-property"
MORTGAGE = "mortgage"
FREE_MORTGAGE = "free-mortgage"
SKIP = "skip"
CONCLUDE = "conclude"
USE_JAIL_CARD = "use-jail-card"
PAY_JAIL_FINE = "pay-jail-fine"
ACCEPT_TRADE = "accept-trade"
BUY_PROPERTY = "buy-property"

MOVE_KINDS = (
    EXCHANGE_OFFER, SELL_OFFER, BUY_OFFER, IMPROVE, SELL_IMPROVEMENT, SELL_PROPERTY,
    MORTGAGE, FREE_MORTGAGE, SKIP, CONCLUDE, USE_JAIL_CARD, PAY_JAIL_FINE,
    ACCEPT_TRADE, BUY_PROPERTY,
)


@dataclass(frozen=True, slots=True)
class Move:
    """One concrete action.

    Parameter use by kind:
      exchange-offer    to_player, prop (offered), prop2 (requested)
      sell-offer        to_player, prop (offered), cash (requested)
      buy-offer         to_player, prop (requested), cash (offered)
      improve           prop, hotel
      sell-improvement  prop, hotel
      sell-property / mortgage / free-mortgage   prop
      buy-property      prop (the square being stood on)
      skip / conclude / use-jail-card / pay-jail-fine / accept-trade   (none)

    Property parameters are property ids (purchasable squares in board order).
    """

    kind: str
    to_player: int = -1
    prop: int = -1
    prop2: int = -1
    cash: int = 0
    hotel: bool = False

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.to_player >= 0:
            out["to_player"] = self.to_player
        if self.prop >= 0:
            out["prop"] = self.prop
        if self.prop2 >= 0:
            out["prop2"] = self.prop2
        if self.cash:
            out["cash"] = self.cash
        if self.hotel:
            out["hotel"] = True
        return out

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "Move":
        kind = doc.get("kind")
        if kind not in MOVE_KINDS:
            raise ValueError(f"unknown move kind: {kind!r}")
        return cls(
            kind=kind,
            to_player=doc.get("to_player", -1),
            prop=doc.get("prop", -1),
            prop2=doc.get("prop2", -1),
            cash=doc.get("cash", 0),
            hotel=doc.get("hotel", False),
        )


SKIP_MOVE = Move(SKIP)
CONCLUDE_MOVE = Move(CONCLUDE)
ACCEPT_TRADE_MOVE = Move(ACCEPT_TRADE)
USE_JAIL_CARD_MOVE = Move(USE_JAIL_CARD)
PAY_JAIL_FINE_MOVE = Move(PAY_JAIL_FINE)


def offer_cash_amount(price: int, level: int) -> int:
    """Cash for a buy/sell trade offer: level 0/1/2 -> 0.75x / 1.0x / 1.25x price.

    Rounded to the nearest integer, halves away from zero.
    """
    if level == 1:
        return price
    numerator = price * (3 if level == 0 else 5)
    return (numerator + 2) // 4


OFFER_CASH_LEVELS = (0, 1, 2)
