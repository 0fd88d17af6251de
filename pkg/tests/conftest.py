import numpy as np
import pytest

from monopoly_rl.engine import load_bundled_schema, new_game
from monopoly_rl.engine.state import BANK, POST_ROLL, RulesConfig


@pytest.fixture(scope="session")
def schema():
    return load_bundled_schema()


@pytest.fixture
def fresh(schema):
    return new_game(schema, seed=7, turn_order=(0, 1, 2, 3))


def give(state, pid, prop_id, houses=0, hotel=False, mortgaged=False):
    """Hand a bank-owned property to a player, optionally improved/mortgaged."""
    q = state.properties[prop_id]
    assert q.owner == BANK, f"property {prop_id} already owned"
    q.owner = pid
    q.houses = houses
    q.hotel = hotel
    q.mortgaged = mortgaged
    state.players[pid].owned.add(prop_id)
    return q


def give_group(state, pid, group, houses=0, hotel=False):
    for prop_id in state.schema.color_groups[group]:
        give(state, pid, prop_id, houses=houses, hotel=hotel)


def to_post_roll(state, roller=None):
    """Force the state into the roller's post-roll decision phase."""
    state.phase = POST_ROLL
    state.phase_actions = 0
    state.settling = False
    if roller is not None:
        state.roller = roller
    return state


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def prop_id_by_name(schema, name):
    for pid in range(schema.num_properties):
        if schema.square_of(pid).name == name:
            return pid
    raise KeyError(name)
