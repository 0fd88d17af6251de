"""Schema loading and board invariants."""

import json

import pytest

from monopoly_rl.engine import SchemaError, load_bundled_schema, load_schema
from monopoly_rl.engine.schema import PURCHASABLE_KINDS

from conftest import prop_id_by_name


def bundled_doc():
    import importlib.resources as resources
    text = resources.files("monopoly_rl.engine").joinpath("data/standard_us.json").read_text()
    return json.loads(text)


class TestBundledSchema:
    def test_square_and_property_counts(self, schema):
        assert len(schema.squares) == 40
        assert schema.num_properties == 28
        assert len(schema.real_estate_ids) == 22
        assert len(schema.railroad_ids) == 4
        assert len(schema.utility_ids) == 2

    def test_color_groups(self, schema):
        assert len(schema.color_groups) == 8
        for members in schema.color_groups.values():
            assert len(members) in (2, 3)

    def test_known_prices(self, schema):
        assert schema.price_of(prop_id_by_name(schema, "Boardwalk")) == 400
        assert schema.price_of(prop_id_by_name(schema, "Mediterranean Avenue")) == 60

    def test_prices_strictly_positive(self, schema):
        for pid in range(schema.num_properties):
            sq = schema.square_of(pid)
            assert sq.price > 0
            if sq.kind == "real-estate":
                assert all(r > 0 for r in sq.rents)
                assert sq.improvement_cost > 0

    def test_bank_constants(self, schema):
        assert schema.starting_cash == 1500
        assert schema.go_salary == 200
        assert schema.jail_fine == 50

    def test_mortgage_values(self, schema):
        boardwalk = prop_id_by_name(schema, "Boardwalk")
        assert schema.mortgage_value(boardwalk) == 200
        assert schema.unmortgage_cost(boardwalk) == 220
        utility = schema.utility_ids[0]  # price 150, 10% of 75 rounds up
        assert schema.mortgage_value(utility) == 75
        assert schema.unmortgage_cost(utility) == 83

    def test_property_ids_follow_board_order(self, schema):
        squares = [schema.property_squares[p] for p in range(schema.num_properties)]
        assert squares == sorted(squares)
        for pid, sq_index in enumerate(squares):
            assert schema.squares[sq_index].kind in PURCHASABLE_KINDS
            assert schema.square_to_property[sq_index] == pid


class TestSchemaValidation:
    def test_load_bundled_equals_load_from_doc(self, schema):
        assert load_schema(bundled_doc()).name == schema.name

    def test_missing_color_group_rejected(self):
        doc = bundled_doc()
        doc["squares"][1] = dict(doc["squares"][1])
        del doc["squares"][1]["group"]
        with pytest.raises(SchemaError, match="color group"):
            load_schema(doc)

    def test_39_squares_rejected(self):
        doc = bundled_doc()
        doc["squares"] = doc["squares"][:39]
        with pytest.raises(SchemaError, match="40"):
            load_schema(doc)

    def test_negative_price_rejected(self):
        doc = bundled_doc()
        doc["squares"][1] = dict(doc["squares"][1], price=-5)
        with pytest.raises(SchemaError, match="price"):
            load_schema(doc)

    def test_bad_json_rejected(self):
        with pytest.raises(SchemaError, match="JSON"):
            load_schema("{not json\n}")

    def test_unknown_version_rejected(self):
        doc = bundled_doc()
        doc["schema_version"] = 99
        with pytest.raises(SchemaError, match="schema_version"):
            load_schema(doc)

    def test_group_size_violation_rejected(self):
        doc = bundled_doc()
        # Move Baltic out of brown into a bogus 4th light-blue slot: brown drops to size 1.
        doc["squares"][3] = dict(doc["squares"][3], group="light-blue")
        with pytest.raises(SchemaError, match="group"):
            load_schema(doc)
