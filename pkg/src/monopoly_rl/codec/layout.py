"""Flat action-space layout: 14 typed blocks over one index range.

Block order and sizes:

    exchange-offer    3 x 28 x 27 = 2268   (recipient, offered, requested)
    sell-offer        3 x 28 x 3  =  252   (recipient, offered, cash level)
    buy-offer         3 x 28 x 3  =  252   (recipient, requested, cash level)
    improve           22 + 22     =   44   (house, then hotel, per real estate)
    sell-improvement  22 + 22     =   44
    sell-property                 =   28
    mortgage                      =   28
    free-mortgage                 =   28
    skip / conclude / use-jail-card / pay-jail-fine / accept-trade / buy-property = 1 each

Recipient slots are the three non-acting players in rotated turn order; cash
levels are 0.75x / 1.0x / 1.25x of the traded property's purchase price.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from ..engine import moves as mv

NUM_PROPERTIES = 28
NUM_REAL_ESTATE = 22
NUM_RECIPIENTS = 3
NUM_CASH_LEVELS = 3

_BLOCK_SIZES = (
    (mv.EXCHANGE_OFFER, NUM_RECIPIENTS * NUM_PROPERTIES * (NUM_PROPERTIES - 1)),
    (mv.SELL_OFFER, NUM_RECIPIENTS * NUM_PROPERTIES * NUM_CASH_LEVELS),
    (mv.BUY_OFFER, NUM_RECIPIENTS * NUM_PROPERTIES * NUM_CASH_LEVELS),
    (mv.IMPROVE, 2 * NUM_REAL_ESTATE),
    (mv.SELL_IMPROVEMENT, 2 * NUM_REAL_ESTATE),
    (mv.SELL_PROPERTY, NUM_PROPERTIES),
    (mv.MORTGAGE, NUM_PROPERTIES),
    (mv.FREE_MORTGAGE, NUM_PROPERTIES),
    (mv.SKIP, 1),
    (mv.CONCLUDE, 1),
    (mv.USE_JAIL_CARD, 1),
    (mv.PAY_JAIL_FINE, 1),
    (mv.ACCEPT_TRADE, 1),
    (mv.BUY_PROPERTY, 1),
)


@dataclass(frozen=True)
class Block:
    name: str
    offset: int
    size: int


class ActionLayout:
    """Offsets and sizes of the 14 action blocks; total width A_TOTAL."""

    def __init__(self) -> None:
        self.blocks: list[Block] = []
        offset = 0
        for name, size in _BLOCK_SIZES:
            self.blocks.append(Block(name, offset, size))
            offset += size
        self.total = offset
        self.offsets = {b.name: b.offset for b in self.blocks}
        self.sizes = {b.name: b.size for b in self.blocks}

    def block_of(self, index: int) -> Block:
        if not 0 <= index < self.total:
            raise IndexError(f"action index {index} out of range [0, {self.total})")
        for block in self.blocks:
            if index < block.offset + block.size:
                return block
        raise AssertionError("unreachable")

    def manifest(self) -> list[dict]:
        return [{"name": b.name, "offset": b.offset, "size": b.size} for b in self.blocks]

    def manifest_json(self) -> str:
        return json.dumps(self.manifest(), separators=(",", ":"))

    def layout_hash(self) -> str:
        return hashlib.sha256(self.manifest_json().encode()).hexdigest()


LAYOUT = ActionLayout()
A_TOTAL = LAYOUT.total
