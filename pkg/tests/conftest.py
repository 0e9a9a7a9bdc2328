"""Shared fixtures: the bundled database, guidelines, agent, and gateway."""

from __future__ import annotations

import socket

import pytest

from dietagent.cli import default_corpus_path, default_db_path
from dietagent.foodkb import ingest
from dietagent.nutrients import default_guidelines
from dietagent.orchestrator import deterministic_agent


@pytest.fixture(scope="session")
def db_path() -> str:
    return default_db_path()


@pytest.fixture(scope="session")
def corpus_path() -> str:
    return default_corpus_path()


@pytest.fixture(scope="session")
def food_index(db_path):
    return ingest(db_path)


@pytest.fixture(scope="session")
def guidelines():
    return default_guidelines()


@pytest.fixture()
def agent(food_index, guidelines):
    return deterministic_agent(food_index, guidelines)


@pytest.fixture()
def gateway_client(food_index, guidelines):
    from fastapi.testclient import TestClient

    from dietagent.gateway import create_app

    app = create_app(food_index, guidelines, mode="deterministic")
    return TestClient(app)


@pytest.fixture()
def sentinel_network(monkeypatch):
    """Fail the test if anything touches the network."""

    def _blow_up(*args, **kwargs):
        raise AssertionError("network access attempted during an offline test")

    import requests

    monkeypatch.setattr(requests, "post", _blow_up)
    monkeypatch.setattr(requests, "get", _blow_up)
    monkeypatch.setattr(requests.Session, "request", _blow_up)
    monkeypatch.setattr(socket, "create_connection", _blow_up)
    monkeypatch.setattr(socket.socket, "connect", _blow_up)
