from .moves import Move
from .rules import (
    IllegalMoveError, LegalMoves, apply_move, compute_rent, legal_moves,
    roll_and_resolve, run_game, sample_legal_move, settle_debts_or_bankrupt, step_game,
)
from .schema import GameSchema, SchemaError, load_bundled_schema, load_schema
from .state import (
    BANK, GameState, PlayerState, PropertyState, ProtocolError, RulesConfig,
    TradeOffer, net_worth, new_game, serialize_state, state_hash, validate_state,
)
