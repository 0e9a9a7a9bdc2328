"""Food database ingestion, lookup scaling, and meal resolution."""

import json
import random
from fractions import Fraction

import pytest

from dietagent.errors import (
    DuplicateAlias,
    EmptyMeal,
    FoodNotFound,
    MealUnresolvable,
    SchemaViolation,
    UnknownUnit,
)
from dietagent.foodkb import FoodIndex, detect_food_content, ingest, lookup, resolve_meal
from dietagent.mealparse import COUNT_UNIT, MASS_UNIT_GRAMS, QuantifiedFood
from dietagent.oracle import meal_totals


def _write(tmp_path, lines) -> str:
    path = tmp_path / "foods.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def _record_line(name, aliases=(), food_id=None, servings=None, per=None) -> str:
    per_100g = {
        "energy_kcal": 100.0, "carbohydrate_g": 10.0, "fat_g": 5.0,
        "saturated_fat_g": 1.0, "protein_g": 4.0, "sodium_mg": 50.0,
        "sugars_g": 2.0, "fiber_g": 1.0,
    }
    if per:
        per_100g.update(per)
    return json.dumps({
        "food_id": food_id or name.replace(" ", "-"),
        "name": name,
        "aliases": list(aliases),
        "per_100g": per_100g,
        "servings": servings or [{"unit": "count", "grams_per_unit": 100.0}],
    })


class TestIngest:
    def test_bundled_database(self, food_index):
        assert len(food_index) >= 60
        expected_keys = set()
        for record in food_index.records:
            expected_keys.add(record.name)
            expected_keys.update(record.aliases)
        assert set(food_index.by_name) == expected_keys
        for record in food_index.records:
            assert "count" in record.servings

    def test_duplicate_name_across_records(self, tmp_path):
        path = _write(tmp_path, [_record_line("rice", food_id="a"),
                                 _record_line("rice", food_id="b")])
        with pytest.raises(DuplicateAlias):
            ingest(path)

    def test_duplicate_alias_across_records(self, tmp_path):
        path = _write(tmp_path, [_record_line("white rice", aliases=["rice"]),
                                 _record_line("brown rice", aliases=["rice"])])
        with pytest.raises(DuplicateAlias):
            ingest(path)

    def test_empty_file_yields_empty_index(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        index = ingest(str(path))
        assert len(index) == 0
        with pytest.raises(FoodNotFound):
            lookup(QuantifiedFood(1, COUNT_UNIT, "rice"), index)

    @pytest.mark.parametrize(
        "line,fragment",
        [
            ("{not json", "invalid JSON"),
            ('"just a string"', "not a JSON object"),
            (json.dumps({"name": "x"}), "missing field"),
        ],
    )
    def test_schema_violations_carry_line_numbers(self, tmp_path, line, fragment):
        path = _write(tmp_path, [_record_line("rice"), line])
        with pytest.raises(SchemaViolation) as excinfo:
            ingest(path)
        assert excinfo.value.line == 2
        assert fragment in str(excinfo.value)

    def test_incomplete_per_100g_rejected(self, tmp_path):
        doc = json.loads(_record_line("rice"))
        del doc["per_100g"]["fiber_g"]  # missing nutrients are not zero
        with pytest.raises(SchemaViolation):
            ingest(_write(tmp_path, [json.dumps(doc)]))

    @pytest.mark.parametrize(
        "servings",
        [
            [{"unit": "cup", "grams_per_unit": 100.0}],  # no count entry
            [{"unit": "g", "grams_per_unit": 1.0}],  # mass units are implicit
            [{"unit": "count", "grams_per_unit": 0.0}],
            [{"unit": "count", "grams_per_unit": 100.0},
             {"unit": "count", "grams_per_unit": 50.0}],
            [{"unit": "handful", "grams_per_unit": 30.0}],
        ],
    )
    def test_bad_servings_rejected(self, tmp_path, servings):
        with pytest.raises(SchemaViolation):
            ingest(_write(tmp_path, [_record_line("rice", servings=servings)]))

    def test_round_trip(self, food_index, tmp_path):
        path = tmp_path / "again.jsonl"
        path.write_text(food_index.to_jsonl(), encoding="utf-8")
        again = ingest(str(path))
        assert again.records == food_index.records
        assert again.by_name == food_index.by_name


class TestLookup:
    def test_toast_slices(self, food_index):
        resolved = lookup(QuantifiedFood(2, "slice", "whole wheat toast"), food_index)
        assert resolved.mass == 56.0
        assert resolved.nutrients.carbohydrate == pytest.approx(24.08, rel=1e-12)

    def test_100_g_is_the_per_100g_row(self, food_index):
        for name in ("white rice", "boiled egg", "salmon"):
            resolved = lookup(QuantifiedFood(100, "g", name), food_index)
            assert resolved.nutrients == food_index.get(name).per_100g

    @pytest.mark.parametrize(
        "quantity,unit,grams",
        [(1, "oz", 28.3495), (1, "lb", 453.592), (2, "kg", 2000.0), (100, "mg", 0.1)],
    )
    def test_mass_unit_conversions(self, food_index, quantity, unit, grams):
        resolved = lookup(QuantifiedFood(quantity, unit, "sugar"), food_index)
        assert resolved.mass == pytest.approx(grams, rel=1e-12)

    def test_unknown_unit(self, food_index):
        with pytest.raises(UnknownUnit):
            lookup(QuantifiedFood(1, "cup", "boiled egg"), food_index)

    def test_unknown_food(self, food_index):
        with pytest.raises(FoodNotFound):
            lookup(QuantifiedFood(1, COUNT_UNIT, "grilled unicorn"), food_index)

    def test_scaling_linearity(self, food_index):
        rng = random.Random(11)
        names = [r.name for r in food_index.records]
        for _ in range(200):
            name = rng.choice(names)
            q = rng.uniform(0.1, 8.0)
            single = lookup(QuantifiedFood(q, COUNT_UNIT, name), food_index)
            double = lookup(QuantifiedFood(2 * q, COUNT_UNIT, name), food_index)
            for field, value in single.nutrients.as_dict().items():
                expected = 2 * value
                got = getattr(double.nutrients, field)
                if expected == 0:
                    assert got == 0
                else:
                    assert abs(got - expected) <= 1e-12 * abs(expected)

    def test_lookup_totality(self, food_index):
        from dietagent.mealparse import CANONICAL_UNITS

        non_mass = [u for u in CANONICAL_UNITS if u not in MASS_UNIT_GRAMS]
        for record in food_index.records:
            for unit in record.servings:
                lookup(QuantifiedFood(1, unit, record.name), food_index)
            for unit in non_mass:
                if unit not in record.servings:
                    with pytest.raises(UnknownUnit):
                        lookup(QuantifiedFood(1, unit, record.name), food_index)


class TestResolveMeal:
    def test_totals_match_exact_rational_sums(self, food_index):
        text = "2 eggs and 1 cup rice"
        resolution = resolve_meal(text, food_index)
        exact = meal_totals(text, food_index.records)
        for field, value in resolution.totals.as_dict().items():
            expected = exact[field]
            if expected == 0:
                assert value == 0.0
            else:
                assert abs(Fraction(value) - expected) <= abs(expected) * Fraction(1, 10**9)

    def test_partial_failure_produces_warnings(self, food_index):
        resolution = resolve_meal("2 eggs and a plate of stardust", food_index)
        assert len(resolution.items) == 1
        assert len(resolution.warnings) == 1
        assert "stardust" in resolution.warnings[0]

    def test_all_items_failing_is_unresolvable(self, food_index):
        with pytest.raises(MealUnresolvable):
            resolve_meal("a plate of stardust and some moon dust", food_index)

    def test_empty_text_propagates(self, food_index):
        with pytest.raises(EmptyMeal):
            resolve_meal("", food_index)


class TestDetectFoodContent:
    def test_plain_meal(self, food_index):
        assert detect_food_content("I ate 2 eggs and toast today", food_index)

    def test_chatty_mention(self, food_index):
        assert detect_food_content("what about adding a candy bar?", food_index)

    def test_small_talk(self, food_index):
        assert not detect_food_content("how did you compute that?", food_index)
        assert not detect_food_content("thanks, that was helpful!", food_index)

    def test_empty_index(self):
        assert not detect_food_content("2 eggs", FoodIndex())
