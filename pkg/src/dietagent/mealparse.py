"""Deterministic parser for free-text meal descriptions.

Grammar, per item::

    ITEM ::= [QTY] [UNIT ["of"]] NAME

Items are separated by ",", "and", "with", or "plus". QTY accepts digits,
decimals, vulgar and mixed fractions ("1/2", "1 1/2"), the number words one
through twelve, "a"/"an" (one), and "half" (0.5, optionally followed by
"a"/"an"). A missing QTY means 1; a missing UNIT means a count of servings.

"of" is consumed only immediately after a unit, so "cream of mushroom soup"
stays one name. Conversational lead-ins ("I ate", "what about adding") and
meal-time tags ("for breakfast", "today") are dropped via a stop-phrase
list before parsing; no other fuzziness is applied, so an unknown food
surfaces later as a lookup failure rather than a guess here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import EmptyMeal, MalformedItem

# The non-unit "unit": a bare count of items/servings, e.g. "2 eggs".
COUNT_UNIT = "count"

CANONICAL_UNITS = (
    "g", "kg", "mg", "oz", "lb", "ml", "l",
    "cup", "tbsp", "tsp", "slice", "piece", "serving", "bowl", "glass",
)

# Surface form -> canonical token. Injective into CANONICAL_UNITS.
UNIT_ALIASES = {
    "g": "g", "gram": "g", "grams": "g",
    "kg": "kg", "kilogram": "kg", "kilograms": "kg",
    "mg": "mg", "milligram": "mg", "milligrams": "mg",
    "oz": "oz", "ounce": "oz", "ounces": "oz",
    "lb": "lb", "lbs": "lb", "pound": "lb", "pounds": "lb",
    "ml": "ml", "milliliter": "ml", "milliliters": "ml",
    "millilitre": "ml", "millilitres": "ml",
    "l": "l", "liter": "l", "liters": "l", "litre": "l", "litres": "l",
    "cup": "cup", "cups": "cup",
    "tbsp": "tbsp", "tbsps": "tbsp", "tablespoon": "tbsp", "tablespoons": "tbsp",
    "tsp": "tsp", "tsps": "tsp", "teaspoon": "tsp", "teaspoons": "tsp",
    "slice": "slice", "slices": "slice",
    "piece": "piece", "pieces": "piece",
    "serving": "serving", "servings": "serving",
    "bowl": "bowl", "bowls": "bowl",
    "glass": "glass", "glasses": "glass",
}

# Grams per unit for pure mass units, applied regardless of the food.
MASS_UNIT_GRAMS = {
    "g": 1.0,
    "kg": 1000.0,
    "mg": 0.001,
    "oz": 28.3495,
    "lb": 453.592,
}

NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

# Meal-time / day tags, removed anywhere in the text.
_TIME_PHRASES = (
    "for breakfast", "for lunch", "for dinner", "for supper", "for brunch",
    "for a snack", "as a snack", "this morning", "this afternoon",
    "this evening", "last night", "tonight", "today", "yesterday",
)

# Conversational lead-ins, stripped repeatedly from the front.
_LEAD_PHRASES = (
    "i ate", "i had", "i have eaten", "i have had", "i've had", "i've eaten",
    "i drank", "i am having", "i'm having", "i just ate", "i just had",
    "i also ate", "i also had", "my meal was", "my meals were",
    "what about adding", "what about", "how about adding", "how about",
    "what if i add", "what if i ate", "can i have", "can i eat",
    "adding", "add", "then", "and then", "plus",
)

_CONNECTIVE_SPLIT = re.compile(r",|\band\b|\bwith\b|\bplus\b")
_INT_OR_DEC = re.compile(r"^\d+(?:\.\d+)?$")
_FRACTION = re.compile(r"^(\d+)/(\d+)$")


@dataclass(frozen=True)
class QuantifiedFood:
    """A parsed (quantity, unit, food name) triple."""

    quantity: float
    unit: str  # canonical unit token, or COUNT_UNIT
    name: str  # normalized: lowercase, single-spaced, singular head noun

    def __post_init__(self):
        if self.quantity <= 0:
            raise ValueError(f"quantity must be positive: {self.quantity}")
        if not self.name:
            raise ValueError("name must be non-empty")


# Food names ending in s that are not plurals.
_PLURAL_EXCEPTIONS = {
    "hummus", "couscous", "asparagus", "citrus", "molasses", "swiss",
}

# Plurals the suffix rules get wrong.
_IRREGULAR_PLURALS = {
    "cookies": "cookie",
    "brownies": "brownie",
    "smoothies": "smoothie",
    "veggies": "veggie",
}

_SIBILANT_ES = re.compile(r"(s|x|z|ch|sh)es$")


def _fold_plural(token: str) -> str:
    """Singularize one token; applied until it stops changing."""
    while True:
        if token in _IRREGULAR_PLURALS:
            token = _IRREGULAR_PLURALS[token]
            continue
        if token in _PLURAL_EXCEPTIONS or token.endswith("ss"):
            return token
        if len(token) > 3 and token.endswith("ies"):
            token = token[:-3] + "y"
            continue
        if token.endswith("oes") or _SIBILANT_ES.search(token):
            token = token[:-2]
            continue
        if token.endswith("s"):
            token = token[:-1]
            continue
        return token


def normalize_name(raw: str) -> str:
    """Canonical food-name form: lowercase, punctuation stripped,
    whitespace collapsed, trailing plural folded on the head noun.

    Idempotent. Raises MalformedItem when nothing survives.
    """
    text = raw.lower()
    text = re.sub(r"[^a-z0-9\s]", " ", text)
    tokens = text.split()
    # Fold the head noun; if it folds away entirely, the next token back
    # becomes the head noun and needs folding too.
    while tokens:
        folded = _fold_plural(tokens[-1])
        if folded:
            tokens[-1] = folded
            break
        tokens.pop()
    if not tokens:
        raise MalformedItem(0, f"name {raw!r} is empty after normalization")
    return " ".join(tokens)


def _strip_stop_phrases(text: str) -> str:
    for phrase in _TIME_PHRASES:
        text = re.sub(rf"\b{re.escape(phrase)}\b", " ", text)
    changed = True
    while changed:
        changed = False
        stripped = text.lstrip(" ,.!?")
        for phrase in _LEAD_PHRASES:
            if stripped.startswith(phrase + " ") or stripped == phrase:
                text = stripped[len(phrase):]
                changed = True
                break
        else:
            text = stripped
    return text


def _parse_quantity(tokens: list[str], start: int) -> tuple[float, int]:
    """Return (quantity, next index); quantity defaults to 1."""
    i = start
    if i >= len(tokens):
        return 1.0, i

    tok = tokens[i]
    frac = _FRACTION.match(tok)
    if frac:
        num, den = int(frac.group(1)), int(frac.group(2))
        if den == 0:
            return -1.0, i + 1  # flagged as malformed by the caller
        return float(Fraction(num, den)), i + 1

    if _INT_OR_DEC.match(tok):
        value = float(tok)
        if i + 1 < len(tokens):
            frac = _FRACTION.match(tokens[i + 1])
            if frac and int(frac.group(2)) != 0:
                value += float(Fraction(int(frac.group(1)), int(frac.group(2))))
                return value, i + 2
        return value, i + 1

    if tok in NUMBER_WORDS:
        return float(NUMBER_WORDS[tok]), i + 1

    if tok in ("a", "an"):
        return 1.0, i + 1

    if tok == "half":
        i += 1
        if i < len(tokens) and tokens[i] in ("a", "an"):
            i += 1
        return 0.5, i

    return 1.0, i  # no quantity token; nothing consumed


def _parse_item(segment: str, position: int) -> QuantifiedFood:
    # Keep "/" and "." so fractions and decimals survive tokenization.
    cleaned = re.sub(r"[^a-z0-9\s/.]", " ", segment.lower())
    tokens = cleaned.split()
    if not tokens:
        raise MalformedItem(position, "item has no tokens")

    quantity, i = _parse_quantity(tokens, 0)
    if quantity <= 0:
        raise MalformedItem(position, f"non-positive quantity in {segment!r}")

    unit = COUNT_UNIT
    if i < len(tokens) and tokens[i] in UNIT_ALIASES:
        unit = UNIT_ALIASES[tokens[i]]
        i += 1
        if i < len(tokens) and tokens[i] == "of":
            i += 1

    raw_name = " ".join(tokens[i:])
    if not raw_name.strip(" ."):
        raise MalformedItem(position, f"no food name in {segment!r}")
    try:
        name = normalize_name(raw_name)
    except MalformedItem:
        raise MalformedItem(position, f"no food name in {segment!r}") from None
    return QuantifiedFood(quantity=quantity, unit=unit, name=name)


def parse_meal(text: str) -> list[QuantifiedFood]:
    """Parse a meal description into quantified items, left to right.

    Raises EmptyMeal when the text is empty or contains no items at all,
    and MalformedItem when an item has no name or a non-positive quantity.
    """
    if not isinstance(text, str) or not text.strip():
        raise EmptyMeal("meal text is empty")

    prepared = _strip_stop_phrases(text.lower())
    segments = [s for s in _CONNECTIVE_SPLIT.split(prepared) if s.strip(" .!?")]
    if not segments:
        raise EmptyMeal(f"no food items in {text!r}")

    return [_parse_item(segment, idx) for idx, segment in enumerate(segments)]
