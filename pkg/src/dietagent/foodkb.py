"""Local food-composition knowledge base.

Records live in a JSON Lines file, one food per line::

    {"food_id": "...", "name": "...", "aliases": ["..."],
     "per_100g": {"energy_kcal": ..., "carbohydrate_g": ..., "fat_g": ...,
                  "saturated_fat_g": ..., "protein_g": ..., "sodium_mg": ...,
                  "sugars_g": ..., "fiber_g": ...},
     "servings": [{"unit": "count", "grams_per_unit": ...}, ...]}

Nutrients are stored per 100 g; servings map unit tokens to grams. Every
record must carry a "count" serving (grams for one item/serving). Lookup is
exact-match on normalized names and aliases; pure mass units (g, kg, mg,
oz, lb) convert directly and ignore the serving table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import (
    DuplicateAlias,
    EmptyMeal,
    FoodNotFound,
    MalformedItem,
    MealUnresolvable,
    SchemaViolation,
    UnknownUnit,
)
from .mealparse import (
    CANONICAL_UNITS,
    COUNT_UNIT,
    MASS_UNIT_GRAMS,
    QuantifiedFood,
    normalize_name,
    parse_meal,
)
from .nutrients import NutrientVector, aggregate

PER_100G_FIELDS = {
    "energy_kcal": "energy",
    "carbohydrate_g": "carbohydrate",
    "fat_g": "fat",
    "saturated_fat_g": "saturated_fat",
    "protein_g": "protein",
    "sodium_mg": "sodium",
    "sugars_g": "sugars",
    "fiber_g": "dietary_fiber",
}

_VALID_SERVING_UNITS = set(CANONICAL_UNITS) | {COUNT_UNIT}


@dataclass(frozen=True)
class FoodRecord:
    food_id: str
    name: str
    aliases: tuple
    per_100g: NutrientVector
    servings: dict  # unit token -> grams per unit

    def to_line(self) -> str:
        nv = self.per_100g
        doc = {
            "food_id": self.food_id,
            "name": self.name,
            "aliases": list(self.aliases),
            "per_100g": {
                "energy_kcal": nv.energy,
                "carbohydrate_g": nv.carbohydrate,
                "fat_g": nv.fat,
                "saturated_fat_g": nv.saturated_fat,
                "protein_g": nv.protein,
                "sodium_mg": nv.sodium,
                "sugars_g": nv.sugars,
                "fiber_g": nv.dietary_fiber,
            },
            "servings": [
                {"unit": unit, "grams_per_unit": grams}
                for unit, grams in self.servings.items()
            ],
        }
        return json.dumps(doc, sort_keys=True)


@dataclass(frozen=True)
class ResolvedItem:
    """One meal item matched to a record and scaled to its mass."""

    source: QuantifiedFood
    record: FoodRecord
    mass: float  # grams
    nutrients: NutrientVector

    def summary(self) -> dict:
        return {
            "quantity": self.source.quantity,
            "unit": self.source.unit,
            "name": self.source.name,
            "food_id": self.record.food_id,
            "mass_g": self.mass,
            "nutrients": self.nutrients.as_dict(),
        }


@dataclass
class FoodIndex:
    """Immutable-after-ingest map of normalized names/aliases to records."""

    records: list = field(default_factory=list)
    by_name: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def get(self, name: str) -> FoodRecord | None:
        return self.by_name.get(name)

    def contains_name(self, name: str) -> bool:
        return name in self.by_name

    def to_jsonl(self) -> str:
        return "".join(record.to_line() + "\n" for record in self.records)


def _parse_record(doc: dict, line_no: int) -> FoodRecord:
    for key in ("food_id", "name", "per_100g", "servings"):
        if key not in doc:
            raise SchemaViolation(line_no, f"missing field {key!r}")
    raw = doc["per_100g"]
    missing = set(PER_100G_FIELDS) - set(raw)
    if missing:
        # Missing nutrients are not silently zero; records must be complete.
        raise SchemaViolation(line_no, f"per_100g missing {sorted(missing)}")
    try:
        per_100g = NutrientVector(
            **{attr: float(raw[key]) for key, attr in PER_100G_FIELDS.items()}
        )
    except Exception as exc:
        raise SchemaViolation(line_no, f"bad per_100g values: {exc}") from exc

    servings = {}
    for entry in doc["servings"]:
        unit = entry.get("unit")
        grams = entry.get("grams_per_unit")
        if unit not in _VALID_SERVING_UNITS:
            raise SchemaViolation(line_no, f"unknown serving unit {unit!r}")
        if unit in MASS_UNIT_GRAMS:
            raise SchemaViolation(line_no, f"mass unit {unit!r} needs no serving entry")
        if unit in servings:
            raise SchemaViolation(line_no, f"duplicate serving unit {unit!r}")
        if not isinstance(grams, (int, float)) or grams <= 0:
            raise SchemaViolation(line_no, f"grams_per_unit must be > 0, got {grams!r}")
        servings[unit] = float(grams)
    if COUNT_UNIT not in servings:
        raise SchemaViolation(line_no, 'record needs a "count" serving entry')

    try:
        name = normalize_name(str(doc["name"]))
        aliases = tuple(normalize_name(str(a)) for a in doc.get("aliases", []))
    except MalformedItem as exc:
        raise SchemaViolation(line_no, f"bad name/alias: {exc}") from exc
    return FoodRecord(
        food_id=str(doc["food_id"]),
        name=name,
        aliases=aliases,
        per_100g=per_100g,
        servings=servings,
    )


def ingest(path) -> FoodIndex:
    """Load a JSONL food database into an index.

    Every normalized name and alias must be unique across all records.
    Errors carry the 1-based line number.
    """
    index = FoodIndex()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(doc, dict):
                raise SchemaViolation(line_no, "line is not a JSON object")
            record = _parse_record(doc, line_no)
            index.records.append(record)
            for key in dict.fromkeys((record.name, *record.aliases)):
                if key in index.by_name:
                    raise DuplicateAlias(key)
                index.by_name[key] = record
    return index


def lookup(item: QuantifiedFood, index: FoodIndex) -> ResolvedItem:
    """Resolve one parsed item to a record, mass, and scaled nutrients."""
    record = index.get(item.name)
    if record is None:
        raise FoodNotFound(item.name)

    if item.unit in MASS_UNIT_GRAMS:
        mass = item.quantity * MASS_UNIT_GRAMS[item.unit]
    else:
        grams_per_unit = record.servings.get(item.unit)
        if grams_per_unit is None:
            raise UnknownUnit(item.name, item.unit)
        mass = item.quantity * grams_per_unit

    return ResolvedItem(
        source=item,
        record=record,
        mass=mass,
        nutrients=record.per_100g.scaled(mass / 100.0),
    )


@dataclass
class MealResolution:
    """Outcome of resolving a whole meal: items, totals, and any warnings."""

    items: list
    totals: NutrientVector
    warnings: list

    def to_payload(self, source_text: str) -> dict:
        return {
            "kind": "meal_resolution",
            "source_text": source_text,
            "items": [item.summary() for item in self.items],
            "totals": self.totals.as_dict(),
            "warnings": list(self.warnings),
        }


def resolve_meal(text: str, index: FoodIndex) -> MealResolution:
    """parse -> lookup -> aggregate, with per-item failures downgraded to
    warnings. Raises MealUnresolvable only when every item fails, and
    propagates EmptyMeal from the parser.
    """
    parsed = parse_meal(text)
    items = []
    warnings = []
    for position, quantified in enumerate(parsed):
        try:
            items.append(lookup(quantified, index))
        except (FoodNotFound, UnknownUnit) as exc:
            warnings.append(f"item {position + 1}: {exc}")
    if not items:
        raise MealUnresolvable(f"no item in {text!r} could be resolved: {warnings}")
    totals = aggregate(item.nutrients for item in items)
    return MealResolution(items=items, totals=totals, warnings=warnings)


def detect_food_content(text: str, index: FoodIndex) -> bool:
    """True when the text mentions any food known to the index.

    Scans normalized token n-grams so chatty turns ("what about adding a
    candy bar?") still register, without doing any fuzzy matching.
    """
    try:
        normalized = normalize_name(text)
    except (MalformedItem, EmptyMeal):
        return False
    tokens = normalized.split()
    max_len = min(len(tokens), 5)
    for n in range(1, max_len + 1):
        for start in range(len(tokens) - n + 1):
            candidate = " ".join(tokens[start : start + n])
            if index.contains_name(candidate):
                return True
            # Plural fold applies to the final token of a full name, so
            # re-fold candidate tails that end mid-sentence.
            try:
                if index.contains_name(normalize_name(candidate)):
                    return True
            except MalformedItem:
                continue
    return False
