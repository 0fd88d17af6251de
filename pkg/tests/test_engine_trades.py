"""Trade offer lifecycle: creation, acceptance, rejection, withdrawal."""

import pytest

from monopoly_rl.engine import IllegalMoveError, apply_move
from monopoly_rl.engine.moves import (
    ACCEPT_TRADE, BUY_OFFER, EXCHANGE_OFFER, MORTGAGE, SELL_OFFER, SKIP, Move,
)
from monopoly_rl.engine.rules import legal_moves
from monopoly_rl.engine.state import OFFER_PENDING, OUT_OF_TURN

from conftest import give, prop_id_by_name


def enter_out_of_turn(state, roller=0):
    state.phase = OUT_OF_TURN
    state.roller = roller
    state.oot_queue = [p for p in state.rotation_from(roller)[1:] if state.players[p].active]
    state.oot_pos = 0
    state.oot_round = 0
    state.oot_round_skips = 0
    return state


class TestOfferCreation:
    def test_sell_offer_goes_pending(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        give(fresh, 0, med)
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=60))
        offer = fresh.pending_offers[1]
        assert offer.status == OFFER_PENDING
        assert offer.offered == med and offer.cash_requested == 60

    def test_offer_cash_must_be_quantized(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")  # price 60
        give(fresh, 0, med)
        with pytest.raises(IllegalMoveError, match="0.75"):
            apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=61))

    def test_second_offer_to_busy_recipient_is_illegal(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        baltic = prop_id_by_name(fresh.schema, "Baltic Avenue")
        give(fresh, 0, med)
        give(fresh, 0, baltic)
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=60))
        with pytest.raises(IllegalMoveError, match="pending"):
            apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=baltic, cash=60))

    def test_mortgaged_property_cannot_be_offered(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        give(fresh, 0, med, mortgaged=True)
        with pytest.raises(IllegalMoveError, match="tradeable"):
            apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=60))

    def test_improved_property_cannot_be_requested(self, fresh):
        from conftest import give_group
        give_group(fresh, 1, "brown", houses=1)
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        with pytest.raises(IllegalMoveError, match="tradeable"):
            apply_move(fresh, 0, Move(BUY_OFFER, to_player=1, prop=med, cash=60))

    def test_buy_offer_requires_cash_on_hand(self, fresh):
        bw = prop_id_by_name(fresh.schema, "Boardwalk")
        give(fresh, 1, bw)
        fresh.players[0].cash = 100
        with pytest.raises(IllegalMoveError, match="afford"):
            apply_move(fresh, 0, Move(BUY_OFFER, to_player=1, prop=bw, cash=400))


class TestAcceptance:
    def test_accept_moves_property_and_cash(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        give(fresh, 0, med)
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=60))
        enter_out_of_turn(fresh, roller=0)
        cash0, cash1 = fresh.players[0].cash, fresh.players[1].cash
        apply_move(fresh, 1, Move(ACCEPT_TRADE))
        assert fresh.properties[med].owner == 1
        assert fresh.players[0].cash == cash0 + 60
        assert fresh.players[1].cash == cash1 - 60
        assert 1 not in fresh.pending_offers

    def test_exchange_swaps_properties_without_cash(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        bw = prop_id_by_name(fresh.schema, "Boardwalk")
        give(fresh, 0, med)
        give(fresh, 1, bw)
        apply_move(fresh, 0, Move(EXCHANGE_OFFER, to_player=1, prop=med, prop2=bw))
        enter_out_of_turn(fresh, roller=0)
        cash0, cash1 = fresh.players[0].cash, fresh.players[1].cash
        apply_move(fresh, 1, Move(ACCEPT_TRADE))
        assert fresh.properties[med].owner == 1
        assert fresh.properties[bw].owner == 0
        assert (fresh.players[0].cash, fresh.players[1].cash) == (cash0, cash1)

    def test_accepting_withdraws_competing_offers_for_same_property(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        give(fresh, 0, med)
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=60))
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=2, prop=med, cash=45))
        enter_out_of_turn(fresh, roller=0)
        apply_move(fresh, 1, Move(ACCEPT_TRADE))
        assert fresh.properties[med].owner == 1
        assert 2 not in fresh.pending_offers

    def test_accept_requires_recipient_cash(self, fresh):
        bw = prop_id_by_name(fresh.schema, "Boardwalk")
        give(fresh, 0, bw)
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=bw, cash=500))
        enter_out_of_turn(fresh, roller=0)
        fresh.players[1].cash = 100
        assert ACCEPT_TRADE not in {m.kind for m in legal_moves(fresh, 1)}
        with pytest.raises(IllegalMoveError, match="payable"):
            apply_move(fresh, 1, Move(ACCEPT_TRADE))


class TestRejectionAndWithdrawal:
    def test_any_other_action_rejects_pending_offer(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        give(fresh, 0, med)
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=60))
        enter_out_of_turn(fresh, roller=0)
        offer = fresh.pending_offers[1]
        _, events = apply_move(fresh, 1, Move(SKIP))
        assert offer.status == "rejected"
        assert 1 not in fresh.pending_offers
        assert any(e["type"] == "offer-rejected" for e in events)

    def test_mortgaging_offered_property_withdraws_offer(self, fresh):
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        give(fresh, 0, med)
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=60))
        offer = fresh.pending_offers[1]
        _, events = apply_move(fresh, 0, Move(MORTGAGE, prop=med))
        assert offer.status == "withdrawn"
        assert 1 not in fresh.pending_offers

    def test_conservation_of_pair_net_worth_on_accept(self, fresh):
        from monopoly_rl.engine import net_worth
        med = prop_id_by_name(fresh.schema, "Mediterranean Avenue")
        give(fresh, 0, med)
        apply_move(fresh, 0, Move(SELL_OFFER, to_player=1, prop=med, cash=75))
        enter_out_of_turn(fresh, roller=0)
        before = net_worth(fresh, 0) + net_worth(fresh, 1)
        apply_move(fresh, 1, Move(ACCEPT_TRADE))
        assert net_worth(fresh, 0) + net_worth(fresh, 1) == before
