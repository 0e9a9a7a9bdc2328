"""Nutrient quantities, guideline thresholds, and risk classification.

A day's intake is held as a :class:`NutrientVector` (energy plus the seven
tracked nutrients). A :class:`GuidelineSet` carries one threshold rule per
nutrient; :func:`assess_risk` compares totals to the rules and produces a
:class:`RiskReport` with one label per nutrient.

Bound semantics are part of the contract: comparisons are exact, with no
epsilon. Ranges written "X to Y" are inclusive at both ends, "limit to X" is
inclusive, and "less than X" is exclusive at the top.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from .errors import InvalidQuantity, UnitMismatch

# Report column order: carbohydrate first, dietary fiber last.
NUTRIENT_ORDER = (
    "carbohydrate",
    "fat",
    "saturated_fat",
    "protein",
    "sodium",
    "sugars",
    "dietary_fiber",
)

# Nutrients whose rule is expressed as percent of total energy.
PERCENT_NUTRIENTS = ("carbohydrate", "fat", "saturated_fat", "protein")

# Below this total energy (kcal), percent-of-energy rules are indeterminate.
MIN_ENERGY_KCAL = 1.0


class RiskLabel(str, Enum):
    RISKY = "Risky"
    NOT_RISKY = "NotRisky"
    INDETERMINATE = "Indeterminate"


def _check_amount(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidQuantity(f"{name} is not finite: {value!r}")
    if value < 0:
        raise InvalidQuantity(f"{name} is negative: {value!r}")
    return value


@dataclass(frozen=True)
class NutrientVector:
    """Per-meal or per-day totals: energy in kcal, sodium in mg, rest in grams."""

    energy: float = 0.0
    carbohydrate: float = 0.0
    fat: float = 0.0
    saturated_fat: float = 0.0
    protein: float = 0.0
    sodium: float = 0.0
    sugars: float = 0.0
    dietary_fiber: float = 0.0

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            object.__setattr__(self, name, _check_amount(name, getattr(self, name)))
        if self.saturated_fat > self.fat:
            raise InvalidQuantity(
                f"saturated_fat {self.saturated_fat} exceeds fat {self.fat}"
            )
        if self.sugars > self.carbohydrate:
            raise InvalidQuantity(
                f"sugars {self.sugars} exceeds carbohydrate {self.carbohydrate}"
            )

    def scaled(self, factor: float) -> "NutrientVector":
        """Multiply every field by a non-negative factor."""
        if not math.isfinite(factor) or factor < 0:
            raise InvalidQuantity(f"scale factor invalid: {factor!r}")
        return NutrientVector(
            **{k: getattr(self, k) * factor for k in self.__dataclass_fields__}
        )

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def aggregate(items: Iterable[NutrientVector]) -> NutrientVector:
    """Field-wise sum of vectors; an empty input yields the zero vector.

    Uses correctly-rounded summation so that k identical vectors sum to
    exactly k times the vector.
    """
    items = list(items)
    totals = {}
    for name in NutrientVector.__dataclass_fields__:
        try:
            total = math.fsum(getattr(v, name) for v in items)
        except OverflowError as exc:
            raise InvalidQuantity(f"sum of {name} overflows") from exc
        if not math.isfinite(total):
            raise InvalidQuantity(f"sum of {name} is not finite")
        totals[name] = total
    return NutrientVector(**totals)


@dataclass(frozen=True)
class NutrientRule:
    """One guideline threshold. Lower bounds are always inclusive."""

    nutrient: str
    basis: str  # "absolute" or "percent_energy"
    unit: str  # "g", "mg", or "percent"
    lower_bound: Optional[float] = None
    upper_bound: Optional[float] = None
    upper_bound_inclusive: bool = True
    provenance: str = ""

    def __post_init__(self):
        if self.nutrient not in NUTRIENT_ORDER:
            raise ValueError(f"unknown nutrient {self.nutrient!r}")
        if self.basis not in ("absolute", "percent_energy"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.unit not in ("g", "mg", "percent"):
            raise ValueError(f"unknown unit {self.unit!r}")
        if self.lower_bound is None and self.upper_bound is None:
            raise ValueError(f"rule for {self.nutrient} has no bounds")
        if (
            self.lower_bound is not None
            and self.upper_bound is not None
            and self.lower_bound > self.upper_bound
        ):
            raise ValueError(f"rule for {self.nutrient} has inverted bounds")


def classify_nutrient(
    rule: NutrientRule, value: Optional[float], unit: Optional[str] = None
) -> RiskLabel:
    """Label a value against one rule.

    ``value=None`` is the indeterminate sentinel, accepted only for
    percent-of-energy rules (a day with no measurable energy). Pass ``unit``
    to have it checked against the rule's unit.
    """
    if unit is not None and unit != rule.unit:
        raise UnitMismatch(f"rule {rule.nutrient} uses {rule.unit!r}, got {unit!r}")
    if value is None:
        if rule.basis != "percent_energy":
            raise InvalidQuantity(f"absolute rule {rule.nutrient} needs a value")
        return RiskLabel.INDETERMINATE
    value = _check_amount(rule.nutrient, value)
    if rule.lower_bound is not None and value < rule.lower_bound:
        return RiskLabel.RISKY
    if rule.upper_bound is not None:
        if rule.upper_bound_inclusive:
            if value > rule.upper_bound:
                return RiskLabel.RISKY
        elif value >= rule.upper_bound:
            return RiskLabel.RISKY
    return RiskLabel.NOT_RISKY


def percent_energy(grams: float, atwater: float, total_energy: float) -> Optional[float]:
    """Caloric share of a macronutrient, as a percentage of total energy.

    Returns None (the indeterminate sentinel) when total energy is below
    1 kcal, so a water-only day never divides by zero.
    """
    grams = _check_amount("grams", grams)
    total_energy = _check_amount("total_energy", total_energy)
    if not math.isfinite(atwater) or atwater <= 0:
        raise InvalidQuantity(f"atwater factor invalid: {atwater!r}")
    if total_energy < MIN_ENERGY_KCAL:
        return None
    return 100.0 * grams * atwater / total_energy


@dataclass(frozen=True)
class GuidelineSet:
    """The seven threshold rules plus the energy conversion factors.

    Atwater factors (kcal per gram) turn macro grams into calories for the
    percent-of-energy rules.
    """

    rules: dict = field(default_factory=dict)  # nutrient -> NutrientRule
    atwater_carb: float = 4.0
    atwater_protein: float = 4.0
    atwater_fat: float = 9.0
    version: str = "custom"

    def __post_init__(self):
        if set(self.rules) != set(NUTRIENT_ORDER):
            missing = set(NUTRIENT_ORDER) - set(self.rules)
            extra = set(self.rules) - set(NUTRIENT_ORDER)
            raise ValueError(f"need one rule per nutrient (missing={missing}, extra={extra})")
        for nutrient, rule in self.rules.items():
            if rule.nutrient != nutrient:
                raise ValueError(f"rule keyed {nutrient!r} is for {rule.nutrient!r}")
        for factor in (self.atwater_carb, self.atwater_protein, self.atwater_fat):
            if not math.isfinite(factor) or factor <= 0:
                raise ValueError(f"atwater factor invalid: {factor!r}")

    def rule(self, nutrient: str) -> NutrientRule:
        return self.rules[nutrient]

    def atwater_for(self, nutrient: str) -> float:
        if nutrient == "carbohydrate":
            return self.atwater_carb
        if nutrient == "protein":
            return self.atwater_protein
        if nutrient in ("fat", "saturated_fat"):
            return self.atwater_fat
        raise ValueError(f"{nutrient} has no atwater factor")

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "atwater": {
                "carbohydrate": self.atwater_carb,
                "protein": self.atwater_protein,
                "fat": self.atwater_fat,
            },
            "rules": [
                {
                    "nutrient": r.nutrient,
                    "basis": r.basis,
                    "unit": r.unit,
                    "lower_bound": r.lower_bound,
                    "upper_bound": r.upper_bound,
                    "upper_bound_inclusive": r.upper_bound_inclusive,
                    "provenance": r.provenance,
                }
                for r in (self.rules[n] for n in NUTRIENT_ORDER)
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "GuidelineSet":
        doc = json.loads(text)
        rules = {}
        for raw in doc["rules"]:
            rule = NutrientRule(
                nutrient=raw["nutrient"],
                basis=raw["basis"],
                unit=raw["unit"],
                lower_bound=raw.get("lower_bound"),
                upper_bound=raw.get("upper_bound"),
                upper_bound_inclusive=raw.get("upper_bound_inclusive", True),
                provenance=raw.get("provenance", ""),
            )
            if rule.nutrient in rules:
                raise ValueError(f"duplicate rule for {rule.nutrient}")
            rules[rule.nutrient] = rule
        atwater = doc.get("atwater", {})
        return cls(
            rules=rules,
            atwater_carb=atwater.get("carbohydrate", 4.0),
            atwater_protein=atwater.get("protein", 4.0),
            atwater_fat=atwater.get("fat", 9.0),
            version=doc.get("version", "custom"),
        )

    @classmethod
    def from_file(cls, path) -> "GuidelineSet":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def default_guidelines() -> GuidelineSet:
    """The ADA/AHA thresholds this package ships with.

    Fiber 20-35 g, sodium at most 2,300 mg, sugars at most 25 g; carbohydrate
    under 45% of energy, protein 15-20%, fat 20-35%, saturated fat under 10%.
    """
    rules = {
        "dietary_fiber": NutrientRule(
            nutrient="dietary_fiber",
            basis="absolute",
            unit="g",
            lower_bound=20.0,
            upper_bound=35.0,
            upper_bound_inclusive=True,
            provenance="American Diabetes Association: 20-35 g dietary fiber per day",
        ),
        "sodium": NutrientRule(
            nutrient="sodium",
            basis="absolute",
            unit="mg",
            upper_bound=2300.0,
            upper_bound_inclusive=True,
            provenance="American Diabetes Association: limit sodium to 2,300 mg per day",
        ),
        "sugars": NutrientRule(
            nutrient="sugars",
            basis="absolute",
            unit="g",
            upper_bound=25.0,
            upper_bound_inclusive=True,
            provenance="American Heart Association: at most 25 g (6 tsp) sugar per day",
        ),
        "carbohydrate": NutrientRule(
            nutrient="carbohydrate",
            basis="percent_energy",
            unit="percent",
            upper_bound=45.0,
            upper_bound_inclusive=False,
            provenance="US diabetic intake reference: under 45% of energy from carbohydrate",
        ),
        "protein": NutrientRule(
            nutrient="protein",
            basis="percent_energy",
            unit="percent",
            lower_bound=15.0,
            upper_bound=20.0,
            upper_bound_inclusive=True,
            provenance="ADA standards of care: protein 15-20% of total calories",
        ),
        "fat": NutrientRule(
            nutrient="fat",
            basis="percent_energy",
            unit="percent",
            lower_bound=20.0,
            upper_bound=35.0,
            upper_bound_inclusive=True,
            provenance="Dietary guidance: fat 20-35% of total calories",
        ),
        "saturated_fat": NutrientRule(
            nutrient="saturated_fat",
            basis="percent_energy",
            unit="percent",
            upper_bound=10.0,
            upper_bound_inclusive=False,
            provenance="AHA guidance: saturated fat under 10% of total calories",
        ),
    }
    return GuidelineSet(rules=rules, version="ada-aha-v1")


@dataclass(frozen=True)
class RiskReport:
    """One assessed day: totals, macro percents, and the seven labels."""

    totals: NutrientVector
    percents: dict  # nutrient -> percent of energy; empty when indeterminate
    labels: dict  # nutrient -> RiskLabel, exactly the seven tracked
    guideline_version: str

    def __post_init__(self):
        if tuple(self.labels) != NUTRIENT_ORDER:
            raise ValueError("labels must cover exactly the 7 tracked nutrients, in order")

    def to_dict(self) -> dict:
        return {
            "totals": self.totals.as_dict(),
            "percents": dict(self.percents),
            "labels": {n: label.value for n, label in self.labels.items()},
            "guideline_version": self.guideline_version,
        }


def assess_risk(totals: NutrientVector, guidelines: GuidelineSet) -> RiskReport:
    """Label each of the seven nutrients against the guideline set.

    Absolute rules read the gram/milligram totals directly; percent rules
    read the macro's share of totals.energy. A pure function of its inputs.
    """
    percents = {}
    labels = {}
    for nutrient in NUTRIENT_ORDER:
        rule = guidelines.rule(nutrient)
        if rule.basis == "percent_energy":
            share = percent_energy(
                getattr(totals, nutrient), guidelines.atwater_for(nutrient), totals.energy
            )
            if share is not None:
                percents[nutrient] = share
            labels[nutrient] = classify_nutrient(rule, share)
        else:
            labels[nutrient] = classify_nutrient(rule, getattr(totals, nutrient))
    return RiskReport(
        totals=totals,
        percents=percents,
        labels=labels,
        guideline_version=guidelines.version,
    )
