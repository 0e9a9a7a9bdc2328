"""Independent ground-truth arithmetic for the evaluation harness.

This module re-derives meal totals and risk labels from first principles,
deliberately sharing no arithmetic with the production path: sums and
percent shares use exact rational arithmetic, thresholds are written out
literally, and food records are matched by a plain linear scan. Meal text
is parsed with the same grammar as production (the grammar is the contract;
the math is what this oracle checks).

Labels are returned as "R" (risky), "NR" (not risky), or "IND"
(indeterminate, percent rules on a day with under 1 kcal).
"""

from __future__ import annotations

from fractions import Fraction

from .errors import FoodNotFound, MealUnresolvable, UnknownUnit
from .mealparse import parse_meal

R, NR, IND = "R", "NR", "IND"

FIELDS = (
    "energy",
    "carbohydrate",
    "fat",
    "saturated_fat",
    "protein",
    "sodium",
    "sugars",
    "dietary_fiber",
)

# Grams per mass unit, restated here as exact decimals.
_MASS_GRAMS = {
    "g": Fraction(1),
    "kg": Fraction(1000),
    "mg": Fraction(1, 1000),
    "oz": Fraction("28.3495"),
    "lb": Fraction("453.592"),
}

_HUNDRED = Fraction(100)


def label_totals(totals: dict) -> dict:
    """Seven labels from a totals mapping (field name -> number).

    Thresholds, written out: fiber within [20, 35] g; sodium at most
    2300 mg; sugars at most 25 g; carbohydrate under 45% of energy;
    protein within [15, 20]%; fat within [20, 35]%; saturated fat under
    10%. Macro percent = 100 * grams * kcal-per-gram / energy, with 4
    kcal/g for carbohydrate and protein and 9 kcal/g for fat.
    """
    t = {k: Fraction(totals[k]) for k in FIELDS}
    labels = {}

    labels["sodium"] = NR if t["sodium"] <= 2300 else R
    labels["sugars"] = NR if t["sugars"] <= 25 else R
    labels["dietary_fiber"] = NR if 20 <= t["dietary_fiber"] <= 35 else R

    energy = t["energy"]
    if energy < 1:
        for nutrient in ("carbohydrate", "fat", "saturated_fat", "protein"):
            labels[nutrient] = IND
    else:
        carb_share = _HUNDRED * t["carbohydrate"] * 4 / energy
        protein_share = _HUNDRED * t["protein"] * 4 / energy
        fat_share = _HUNDRED * t["fat"] * 9 / energy
        satfat_share = _HUNDRED * t["saturated_fat"] * 9 / energy
        labels["carbohydrate"] = NR if carb_share < 45 else R
        labels["protein"] = NR if 15 <= protein_share <= 20 else R
        labels["fat"] = NR if 20 <= fat_share <= 35 else R
        labels["saturated_fat"] = NR if satfat_share < 10 else R

    return {
        "carbohydrate": labels["carbohydrate"],
        "fat": labels["fat"],
        "saturated_fat": labels["saturated_fat"],
        "protein": labels["protein"],
        "sodium": labels["sodium"],
        "sugars": labels["sugars"],
        "dietary_fiber": labels["dietary_fiber"],
    }


def _find_record(name: str, records):
    for record in records:
        if record.name == name or name in record.aliases:
            return record
    raise FoodNotFound(name)


def _item_mass(item, record) -> Fraction:
    if item.unit in _MASS_GRAMS:
        return Fraction(item.quantity) * _MASS_GRAMS[item.unit]
    grams = record.servings.get(item.unit)
    if grams is None:
        raise UnknownUnit(item.name, item.unit)
    return Fraction(item.quantity) * Fraction(str(grams))


def meal_totals(text: str, records) -> dict:
    """Exact rational totals for a meal; raises when any item fails.

    Per-100g record values are read as the decimals they were written as.
    """
    items = parse_meal(text)
    sums = {k: Fraction(0) for k in FIELDS}
    failures = []
    for item in items:
        try:
            record = _find_record(item.name, records)
            factor = _item_mass(item, record) / 100
        except (FoodNotFound, UnknownUnit) as exc:
            failures.append(str(exc))
            continue
        per = record.per_100g
        sums["energy"] += Fraction(str(per.energy)) * factor
        sums["carbohydrate"] += Fraction(str(per.carbohydrate)) * factor
        sums["fat"] += Fraction(str(per.fat)) * factor
        sums["saturated_fat"] += Fraction(str(per.saturated_fat)) * factor
        sums["protein"] += Fraction(str(per.protein)) * factor
        sums["sodium"] += Fraction(str(per.sodium)) * factor
        sums["sugars"] += Fraction(str(per.sugars)) * factor
        sums["dietary_fiber"] += Fraction(str(per.dietary_fiber)) * factor
    if failures:
        raise MealUnresolvable(f"oracle could not resolve: {failures}")
    return sums


def label_meal(text: str, records) -> dict:
    """Labels for a meal description: parse, resolve, sum, compare."""
    return label_totals(meal_totals(text, records))
