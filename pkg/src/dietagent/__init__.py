"""Conversational diet risk assessment for diabetic meal guidance.

Library surface: parse meal text, resolve nutrients from a local food
database, classify seven nutrients against ADA/AHA thresholds, and drive
the whole pipeline through a planner/executor agent loop with a traceable
data pipe. See the gateway module for the HTTP API and cli for the
command-line entry points.
"""

from .errors import DietAgentError
from .foodkb import FoodIndex, FoodRecord, ResolvedItem, ingest, lookup, resolve_meal
from .mealparse import QuantifiedFood, normalize_name, parse_meal
from .nutrients import (
    NUTRIENT_ORDER,
    GuidelineSet,
    NutrientRule,
    NutrientVector,
    RiskLabel,
    RiskReport,
    aggregate,
    assess_risk,
    classify_nutrient,
    default_guidelines,
    percent_energy,
)
from .orchestrator import Agent, deterministic_agent, llm_agent

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "DietAgentError",
    "FoodIndex",
    "FoodRecord",
    "GuidelineSet",
    "NUTRIENT_ORDER",
    "NutrientRule",
    "NutrientVector",
    "QuantifiedFood",
    "ResolvedItem",
    "RiskLabel",
    "RiskReport",
    "aggregate",
    "assess_risk",
    "classify_nutrient",
    "default_guidelines",
    "deterministic_agent",
    "ingest",
    "llm_agent",
    "lookup",
    "normalize_name",
    "parse_meal",
    "percent_energy",
    "resolve_meal",
    "__version__",
]
