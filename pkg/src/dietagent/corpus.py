"""Deterministic generator for the bundled evaluation corpus.

Builds a pool of candidate meal questions (handwritten plus parametric
quantity sweeps over the bundled food database), labels each with the
independent oracle, and selects a corpus that covers the Risky and
NotRisky side of every nutrient, boundary-adjacent totals, and the whole
parser grammar (fractions, number words, every connective, mass/volume
units, conversational lead-ins).

Two guardrails keep the corpus honest:

* knife-edge candidates (a total or percent within rounding distance of a
  threshold without being exactly on it) are discarded;
* every emitted question's oracle labels must agree with the production
  assessment path, otherwise generation aborts - disagreement means a
  arithmetic defect, not a corpus problem.

Regenerate with: ``dietagent corpus generate --db <foods.jsonl> --out <file>``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .evalharness import EvalQuestion
from .foodkb import FoodIndex, resolve_meal
from .nutrients import GuidelineSet, assess_risk, default_guidelines
from .oracle import IND, label_totals, meal_totals

_HANDWRITTEN = [
    "2 slices of whole wheat toast and a boiled egg",
    "I had 1 cup of oatmeal with a banana and a glass of milk for breakfast",
    "two scrambled eggs, 2 slices of bacon and a cup of coffee",
    "a bowl of cornflakes with a cup of milk",
    "1 bagel with 2 tablespoons of peanut butter",
    "3 pancakes with 2 tbsp of honey",
    "a cup of greek yogurt with 1/2 cup of granola and a cup of blueberries",
    "1 1/2 cups of oatmeal and an apple",
    "a glass of orange juice and a bagel",
    "1 cup of white rice and 150 g of chicken breast",
    "2 cups of pasta with 100 g of ground beef",
    "a caesar salad with 100 g of grilled chicken",
    "2 slices of pizza and a soda",
    "a cheeseburger with french fries",
    "1 bowl of chicken soup and 2 slices of white bread",
    "200 g of beef steak with a baked potato",
    "6 oz of salmon, 1 cup of quinoa and a cup of broccoli",
    "1 cup of lentils and 1 cup of brown rice",
    "a tortilla with 1/2 cup of black beans and 50 g of cheddar cheese",
    "150 g of pork chop with 1 cup of green beans",
    "8 oz of tuna with 2 cups of lettuce and 1 tbsp of olive oil",
    "100 g of tofu with 1 cup of white rice and 1 tbsp of soy sauce",
    "two slices of ham, a slice of cheddar cheese and 2 slices of white bread",
    "a candy bar and a soda",
    "2 chocolate chip cookies and a glass of milk",
    "1 cup of ice cream",
    "28 g of almonds and an apple",
    "a bowl of potato chips",
    "three pieces of dark chocolate",
    "2 tbsp of honey and a cup of coffee",
    "half an avocado and a slice of whole wheat toast",
    "4 slices of bacon and 2 boiled eggs",
    "2 bowls of chicken soup with 4 slices of ham",
    "2 slices of pizza and a pickle",
    "100 g of ham and 2 pickles",
    "2 bowls of lentils and a pear",
    "1 cup of chickpeas, 1 cup of black beans and an avocado",
    "3 cups of black beans",
    "2 cups of kidney beans and 1 cup of brown rice",
    "a cup of lettuce and a tomato",
    "2 cups of watermelon and a peach",
    "a peach and a pear",
    "500 ml of milk and 2 bananas",
    "250 ml of orange juice and 2 slices of toast",
    "0.5 kg of potatoes",
    "for dinner I had 12 pieces of shrimp and a cup of quinoa",
    "an orange, a banana and a cup of grapes",
    "1 lb of watermelon",
    "a bowl of cottage cheese and 1/2 cup of strawberries",
    "what about adding a candy bar",
    "1 cup of mushrooms, an onion and 2 bell peppers",
    "4 slices of turkey breast and a cup of spinach",
    "2 pieces of corn and 1 tbsp of butter",
    "eleven almonds",
]


def _parametric_pool() -> list:
    pool = []
    for chicken_g in (50, 100, 150, 200):
        for rice in ("1/2", "1", "1 1/2", "2"):
            pool.append(
                f"{chicken_g} g of chicken breast, {rice} cups of white rice "
                "and 1 tbsp of olive oil"
            )
    for salmon_g in (100, 150, 200):
        for quinoa in ("1/2", "1", "2"):
            pool.append(f"{salmon_g} g of salmon and {quinoa} cups of quinoa")
    for cups in ("1", "2"):
        for granola in ("1/2", "1"):
            pool.append(f"{cups} cups of greek yogurt and {granola} cup of granola")
    for slices in (1, 2, 3, 4, 5, 6):
        pool.append(f"{slices} slices of ham and a bowl of chicken soup")
    for cups in (1, 2, 3):
        pool.append(f"{cups} cups of lentils plus a cup of brown rice")
    for tsp in (3, 4, 5, 6, 7, 8):
        pool.append(f"{tsp} tsp of sugar and a cup of coffee")
    for cookies in (1, 2, 3):
        pool.append(f"{cookies} chocolate chip cookies and a glass of whole milk")
    for eggs in ("two", "three", "four"):
        pool.append(f"{eggs} boiled eggs and a cup of black coffee")
    for oz in (2, 4, 6):
        pool.append(f"{oz} oz of cheddar cheese and 2 slices of white bread")
    return pool


_FEATURE_PATTERNS = {
    "decimal": re.compile(r"\b\d+\.\d+\b"),
    "fraction": re.compile(r"\b\d+/\d+\b"),
    "mixed_fraction": re.compile(r"\b\d+ \d+/\d+\b"),
    "number_word": re.compile(
        r"\b(one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve)\b"
    ),
    "half": re.compile(r"\bhalf an?\b"),
    "article_qty": re.compile(r"\b(a|an)\b"),
    "mass_unit": re.compile(r"\b\d+(\.\d+)?\s*(g|kg|oz|lb)\b"),
    "volume_unit": re.compile(r"\b\d+(\.\d+)?\s*(ml|l)\b"),
    "lead_in": re.compile(r"^(i had|what about|for dinner i had)", re.I),
    "time_tag": re.compile(r"\bfor (breakfast|dinner)\b"),
    "comma": re.compile(r","),
    "and": re.compile(r"\band\b"),
    "with": re.compile(r"\bwith\b"),
    "plus": re.compile(r"\bplus\b"),
}


def _features(text: str) -> set:
    return {name for name, pattern in _FEATURE_PATTERNS.items() if pattern.search(text)}


# Exact thresholds, restated for the knife-edge filter.
_ABS_BOUNDS = {"sodium": (2300,), "sugars": (25,), "dietary_fiber": (20, 35)}
_SHARE_BOUNDS = {
    "carbohydrate": (45,),
    "protein": (15, 20),
    "fat": (20, 35),
    "saturated_fat": (10,),
}
_ATWATER = {"carbohydrate": 4, "protein": 4, "fat": 9, "saturated_fat": 9}

_KNIFE_EDGE_ABS = Fraction(1, 10**6)
_KNIFE_EDGE_REL = Fraction(1, 10**9)
_NEAR_BOUNDARY_REL = Fraction(7, 100)


def _boundary_profile(totals: dict) -> tuple[bool, bool]:
    """(knife_edge, near_boundary) for exact oracle totals."""
    knife_edge = False
    near = False
    values = {}
    for nutrient, bounds in _ABS_BOUNDS.items():
        for bound in bounds:
            values[(nutrient, bound)] = (totals[nutrient], Fraction(bound))
    if totals["energy"] >= 1:
        for nutrient, bounds in _SHARE_BOUNDS.items():
            share = Fraction(100) * totals[nutrient] * _ATWATER[nutrient] / totals["energy"]
            for bound in bounds:
                values[(nutrient, bound)] = (share, Fraction(bound))
    for value, bound in values.values():
        distance = abs(value - bound)
        if 0 < distance < max(_KNIFE_EDGE_ABS, bound * _KNIFE_EDGE_REL):
            knife_edge = True
        if distance <= bound * _NEAR_BOUNDARY_REL:
            near = True
    return knife_edge, near


_LABEL_CODES = {"Risky": "R", "NotRisky": "NR", "Indeterminate": "IND"}


def generate_corpus(
    index: FoodIndex,
    guidelines: GuidelineSet | None = None,
    size: int = 60,
) -> list:
    """Build the corpus. Deterministic: same database, same corpus."""
    guidelines = guidelines or default_guidelines()
    records = index.records

    candidates = []
    for text in _HANDWRITTEN + _parametric_pool():
        totals = meal_totals(text, records)  # raises if a food is missing
        labels = label_totals(totals)
        if IND in labels.values():
            continue
        knife_edge, near = _boundary_profile(totals)
        if knife_edge:
            continue
        production = assess_risk(resolve_meal(text, index).totals, guidelines)
        production_labels = {n: _LABEL_CODES[v.value] for n, v in production.labels.items()}
        if production_labels != labels:
            raise RuntimeError(
                f"oracle and production disagree on {text!r}: "
                f"{labels} vs {production_labels}"
            )
        candidates.append(
            {"text": text, "labels": labels, "near": near, "features": _features(text)}
        )

    chosen: list[dict] = []
    chosen_texts = set()

    def take(candidate) -> None:
        if candidate["text"] not in chosen_texts:
            chosen.append(candidate)
            chosen_texts.add(candidate["text"])

    # 1. Both sides of every nutrient, at least twice each.
    for nutrient in ("carbohydrate", "fat", "saturated_fat", "protein",
                     "sodium", "sugars", "dietary_fiber"):
        for side in ("R", "NR"):
            matching = [c for c in candidates if c["labels"][nutrient] == side]
            if len(matching) < 2:
                raise RuntimeError(f"no coverage for {nutrient}={side}")
            for candidate in matching[:2]:
                take(candidate)

    # 2. Every grammar feature at least once.
    for feature in _FEATURE_PATTERNS:
        if any(feature in c["features"] for c in chosen):
            continue
        matching = [c for c in candidates if feature in c["features"]]
        if not matching:
            raise RuntimeError(f"no candidate exercises feature {feature!r}")
        take(matching[0])

    # 3. Boundary-adjacent meals.
    for candidate in [c for c in candidates if c["near"]][:8]:
        take(candidate)

    # 4. Fill to size in pool order.
    for candidate in candidates:
        if len(chosen) >= size:
            break
        take(candidate)
    if len(chosen) < size:
        raise RuntimeError(f"candidate pool too small: {len(chosen)} < {size}")

    return [
        EvalQuestion(id=f"q{i:03d}", question=c["text"], ground_truth=c["labels"])
        for i, c in enumerate(chosen, start=1)
    ]
