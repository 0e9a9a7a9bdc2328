"""Remote nutrition adapter: credential handling, mapping, failure modes."""

import os

import pytest

from dietagent.errors import AuthError, NetworkError, UnparseableResponse
from dietagent.remote import RemoteConfig, RemoteNutritionClient


class FakeResponse:
    def __init__(self, status_code=200, body=None, text=""):
        self.status_code = status_code
        self._body = body
        self.text = text or (str(body) if body is not None else "")

    def json(self):
        if isinstance(self._body, Exception):
            raise self._body
        return self._body


def make_client(response=None, post=None) -> RemoteNutritionClient:
    config = RemoteConfig(url="https://nutrition.example/v2/natural", app_id="id", app_key="key")
    if post is None:
        def post(url, **kwargs):
            return response
    return RemoteNutritionClient(config=config, post=post)


GOOD_FOOD = {
    "food_name": "apple",
    "serving_qty": 1,
    "serving_unit": "medium",
    "serving_weight_grams": 182.0,
    "nf_calories": 94.6,
    "nf_total_carbohydrate": 25.1,
    "nf_total_fat": 0.3,
    "nf_saturated_fat": 0.05,
    "nf_protein": 0.5,
    "nf_sodium": 1.8,
    "nf_sugars": 18.9,
    "nf_dietary_fiber": 4.4,
}


class TestCredentials:
    def test_missing_credentials_fail_before_any_network_call(self, monkeypatch):
        for var in ("NUTRITION_API_URL", "NUTRITION_API_ID", "NUTRITION_API_KEY"):
            monkeypatch.delenv(var, raising=False)

        def exploding_post(*args, **kwargs):
            raise AssertionError("a network call was attempted")

        with pytest.raises(AuthError):
            RemoteNutritionClient(post=exploding_post)

    def test_rejected_credentials(self):
        client = make_client(FakeResponse(status_code=401))
        with pytest.raises(AuthError):
            client.remote_lookup("1 apple")


class TestFailureModes:
    def test_network_error(self):
        def post(url, **kwargs):
            raise ConnectionError("boom")

        client = make_client(post=post)
        with pytest.raises(NetworkError):
            client.remote_lookup("1 apple")

    def test_server_error(self):
        client = make_client(FakeResponse(status_code=500))
        with pytest.raises(NetworkError):
            client.remote_lookup("1 apple")

    def test_malformed_body_carries_excerpt(self):
        client = make_client(FakeResponse(body={"unexpected": []}, text='{"unexpected": []}'))
        with pytest.raises(UnparseableResponse) as excinfo:
            client.remote_lookup("1 apple")
        assert "unexpected" in str(excinfo.value)

    def test_bad_numbers_are_unparseable(self):
        broken = dict(GOOD_FOOD, serving_weight_grams=0)
        client = make_client(FakeResponse(body={"foods": [broken]}))
        with pytest.raises(UnparseableResponse):
            client.remote_lookup("1 apple")


class TestMapping:
    def test_maps_onto_resolved_items(self):
        client = make_client(FakeResponse(body={"foods": [GOOD_FOOD]}))
        items = client.remote_lookup("1 apple")
        assert len(items) == 1
        item = items[0]
        assert item.source.name == "apple"
        assert item.mass == 182.0
        assert item.nutrients.energy > 0
        # Same invariant as the local path: nutrients = per_100g * mass/100.
        rescaled = item.record.per_100g.scaled(item.mass / 100.0)
        assert rescaled == item.nutrients

    def test_request_shape(self):
        captured = {}

        def post(url, **kwargs):
            captured["url"] = url
            captured.update(kwargs)
            return FakeResponse(body={"foods": [GOOD_FOOD]})

        client = make_client(post=post)
        client.remote_lookup("1 apple")
        assert captured["json"] == {"query": "1 apple"}
        assert captured["headers"]["x-app-id"] == "id"
        assert captured["headers"]["x-app-key"] == "key"


@pytest.mark.skipif(
    not (os.environ.get("NUTRITION_API_URL") and os.environ.get("NUTRITION_API_ID")
         and os.environ.get("NUTRITION_API_KEY")),
    reason="live nutrition API credentials not configured",
)
def test_live_smoke():
    items = RemoteNutritionClient().remote_lookup("1 apple")
    assert len(items) >= 1
    assert items[0].nutrients.energy > 0
