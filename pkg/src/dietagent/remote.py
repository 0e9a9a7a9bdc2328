"""Optional adapter for a remote natural-language nutrition API.

POSTs the raw meal text to a configured endpoint and maps each returned
food onto the same ResolvedItem shape the local knowledge base produces,
so callers cannot tell the two sources apart. Configured entirely through
the environment:

    NUTRITION_API_URL   endpoint for the natural-language nutrients call
    NUTRITION_API_ID    application id header
    NUTRITION_API_KEY   application key header

Never used by the deterministic test path. Failures are surfaced, not
silently degraded.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import requests

from .errors import (
    AuthError,
    InvalidQuantity,
    MalformedItem,
    NetworkError,
    UnparseableResponse,
)
from .foodkb import FoodRecord, ResolvedItem
from .mealparse import COUNT_UNIT, QuantifiedFood, normalize_name
from .nutrients import NutrientVector

def remote_meal_resolver(client: "RemoteNutritionClient"):
    """Adapt the remote client to the lookup task's resolver contract.

    The remote service does its own natural-language parsing, so the local
    grammar is bypassed entirely in live mode.
    """
    from .foodkb import MealResolution
    from .nutrients import aggregate

    def resolver(text: str) -> MealResolution:
        items = client.remote_lookup(text)
        totals = aggregate(item.nutrients for item in items)
        return MealResolution(items=items, totals=totals, warnings=[])

    return resolver


_NUTRIENT_FIELDS = {
    "nf_calories": "energy",
    "nf_total_carbohydrate": "carbohydrate",
    "nf_total_fat": "fat",
    "nf_saturated_fat": "saturated_fat",
    "nf_protein": "protein",
    "nf_sodium": "sodium",
    "nf_sugars": "sugars",
    "nf_dietary_fiber": "dietary_fiber",
}


@dataclass
class RemoteConfig:
    url: str
    app_id: str
    app_key: str

    @classmethod
    def from_env(cls) -> "RemoteConfig":
        url = os.environ.get("NUTRITION_API_URL", "")
        app_id = os.environ.get("NUTRITION_API_ID", "")
        app_key = os.environ.get("NUTRITION_API_KEY", "")
        if not (url and app_id and app_key):
            raise AuthError(
                "NUTRITION_API_URL, NUTRITION_API_ID and NUTRITION_API_KEY must be set"
            )
        return cls(url=url, app_id=app_id, app_key=app_key)


class RemoteNutritionClient:
    """Thin client for the natural-language nutrients endpoint."""

    def __init__(self, config: RemoteConfig | None = None, post=None, timeout: float = 15.0):
        self._config = config or RemoteConfig.from_env()
        self._post = post or requests.post
        self._timeout = timeout

    def remote_lookup(self, text: str) -> list[ResolvedItem]:
        """Resolve a meal description through the remote service."""
        try:
            response = self._post(
                self._config.url,
                json={"query": text},
                headers={
                    "x-app-id": self._config.app_id,
                    "x-app-key": self._config.app_key,
                    "Content-Type": "application/json",
                },
                timeout=self._timeout,
            )
        except Exception as exc:
            raise NetworkError(f"nutrition API unreachable: {exc}") from exc

        if response.status_code in (401, 403):
            raise AuthError(f"nutrition API rejected credentials ({response.status_code})")
        if response.status_code >= 400:
            raise NetworkError(f"nutrition API error {response.status_code}")

        try:
            body = response.json()
            foods = body["foods"]
            return [self._map_food(food) for food in foods]
        except (KeyError, TypeError, ValueError, InvalidQuantity, MalformedItem) as exc:
            excerpt = getattr(response, "text", "")[:200]
            raise UnparseableResponse(f"bad nutrition API body ({exc}): {excerpt!r}") from exc

    def _map_food(self, food: dict) -> ResolvedItem:
        name = normalize_name(str(food["food_name"]))
        mass = float(food["serving_weight_grams"])
        if mass <= 0:
            raise ValueError(f"serving_weight_grams must be positive, got {mass}")
        quantity = float(food.get("serving_qty", 1) or 1)
        unit = str(food.get("serving_unit") or COUNT_UNIT)

        nutrients = NutrientVector(
            **{attr: float(food.get(key) or 0.0) for key, attr in _NUTRIENT_FIELDS.items()}
        )
        # Back out a per-100g basis so the local scaling invariant holds.
        per_100g = nutrients.scaled(100.0 / mass)
        record = FoodRecord(
            food_id=f"remote:{name}",
            name=name,
            aliases=(),
            per_100g=per_100g,
            servings={COUNT_UNIT: mass / quantity if quantity > 0 else mass},
        )
        return ResolvedItem(
            source=QuantifiedFood(quantity=quantity, unit=COUNT_UNIT, name=name),
            record=record,
            mass=mass,
            nutrients=per_100g.scaled(mass / 100.0),
        )
