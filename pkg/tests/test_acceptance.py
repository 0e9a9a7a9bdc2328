"""Acceptance suite: one test per release criterion, at stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line and
the elapsed time per criterion. Each test also enforces its runtime budget.
"""

import random
import re
import string
import time
from contextlib import contextmanager
from fractions import Fraction

from fastapi.testclient import TestClient

from dietagent.backend import ScriptedChatBackend
from dietagent.evalharness import (
    InProcessTarget,
    LlmBaselineTarget,
    load_corpus,
    render_report,
    run_eval,
)
from dietagent.foodkb import resolve_meal
from dietagent.gateway import create_app
from dietagent.mealparse import normalize_name, parse_meal
from dietagent.nutrients import (
    NUTRIENT_ORDER,
    NutrientVector,
    RiskLabel,
    assess_risk,
    classify_nutrient,
)
from dietagent.oracle import label_totals, meal_totals
from dietagent.orchestrator import (
    ASSESS_TASK,
    FINAL_ACTION,
    LOOKUP_TASK,
    deterministic_agent,
    llm_agent,
)
from tests.test_mealparse import GRAMMAR_CASES
from tests.test_orchestrator import SCRIPTED_TURN


@contextmanager
def criterion(name: str, budget_seconds: float):
    started = time.perf_counter()
    yield
    elapsed = time.perf_counter() - started
    assert elapsed < budget_seconds, f"{name} took {elapsed:.2f}s (budget {budget_seconds}s)"
    print(f"PASS: {name} ({elapsed:.2f}s)")


R, NR = RiskLabel.RISKY, RiskLabel.NOT_RISKY


def test_threshold_fidelity(guidelines):
    """Every stated bound, probed exactly and at bound +/- 0.1."""
    with criterion("threshold fidelity", 1.0):
        rules = guidelines.rules
        assert rules["dietary_fiber"].lower_bound == 20.0
        assert rules["dietary_fiber"].upper_bound == 35.0
        assert rules["sodium"].upper_bound == 2300.0
        assert rules["carbohydrate"].upper_bound == 45.0
        assert not rules["carbohydrate"].upper_bound_inclusive
        assert rules["protein"].lower_bound == 15.0
        assert rules["protein"].upper_bound == 20.0
        assert rules["fat"].lower_bound == 20.0
        assert rules["fat"].upper_bound == 35.0
        assert rules["saturated_fat"].upper_bound == 10.0
        assert not rules["saturated_fat"].upper_bound_inclusive
        assert rules["sugars"].upper_bound == 25.0

        cases = [
            ("dietary_fiber", [(19.9, R), (20.0, NR), (20.1, NR),
                               (34.9, NR), (35.0, NR), (35.1, R)]),
            ("sodium", [(2299.9, NR), (2300.0, NR), (2300.1, R)]),
            ("sugars", [(24.9, NR), (25.0, NR), (25.1, R)]),
            ("carbohydrate", [(44.9, NR), (45.0, R), (45.1, R)]),
            ("protein", [(14.9, R), (15.0, NR), (15.1, NR),
                         (19.9, NR), (20.0, NR), (20.1, R)]),
            ("fat", [(19.9, R), (20.0, NR), (20.1, NR),
                     (34.9, NR), (35.0, NR), (35.1, R)]),
            ("saturated_fat", [(9.9, NR), (10.0, R), (10.1, R)]),
        ]
        for nutrient, probes in cases:
            for value, expected in probes:
                got = classify_nutrient(rules[nutrient], value)
                assert got is expected, f"{nutrient} at {value}: {got} != {expected}"


def test_paper_anecdote_44_vs_45_percent(guidelines):
    """A day at exactly 44.0% carbohydrate energy passes; 45.0% fails."""
    with criterion("carbohydrate 44%/45% anecdote", 1.0):
        # 4 kcal/g: 110 g of carbohydrate on a 1000 kcal day is exactly 44%,
        # 112.5 g is exactly 45%; both are exact in binary floating point.
        at_44 = assess_risk(NutrientVector(energy=1000.0, carbohydrate=110.0), guidelines)
        at_45 = assess_risk(NutrientVector(energy=1000.0, carbohydrate=112.5), guidelines)
        assert at_44.percents["carbohydrate"] == 44.0
        assert at_45.percents["carbohydrate"] == 45.0
        assert at_44.labels["carbohydrate"] is NR
        assert at_45.labels["carbohydrate"] is R


def test_oracle_equivalence_on_1000_random_vectors(guidelines):
    """Production labels equal the exact-arithmetic oracle's, 1000 of 1000."""
    with criterion("oracle equivalence (1000 vectors)", 10.0):
        codes = {"Risky": "R", "NotRisky": "NR", "Indeterminate": "IND"}
        rng = random.Random(20240601)
        vectors = [NutrientVector()]
        for _ in range(999):
            carb = rng.uniform(0, 400)
            fat = rng.uniform(0, 150)
            vectors.append(
                NutrientVector(
                    energy=rng.uniform(0, 4000),
                    carbohydrate=carb,
                    fat=fat,
                    saturated_fat=fat * rng.random(),
                    protein=rng.uniform(0, 250),
                    sodium=rng.uniform(0, 6000),
                    sugars=carb * rng.random(),
                    dietary_fiber=rng.uniform(0, 60),
                )
            )
        disagreements = 0
        for vector in vectors:
            production = {
                n: codes[label.value]
                for n, label in assess_risk(vector, guidelines).labels.items()
            }
            disagreements += production != label_totals(vector.as_dict())
        assert disagreements == 0


AGGREGATION_MEALS = [
    "2 slices of whole wheat toast and a boiled egg",
    "1 cup of oatmeal with a banana and a glass of milk",
    "two scrambled eggs, 2 slices of bacon and a cup of coffee",
    "a bowl of cornflakes with a cup of milk",
    "1 bagel with 2 tablespoons of peanut butter",
    "1 cup of white rice and 150 g of chicken breast",
    "2 cups of pasta with 100 g of ground beef",
    "a caesar salad with 100 g of grilled chicken",
    "2 slices of pizza and a soda",
    "a cheeseburger with french fries",
    "6 oz of salmon, 1 cup of quinoa and a cup of broccoli",
    "1 cup of lentils and 1 cup of brown rice",
    "8 oz of tuna with 2 cups of lettuce and 1 tbsp of olive oil",
    "a candy bar and a soda",
    "28 g of almonds and an apple",
    "half an avocado and a slice of whole wheat toast",
    "4 slices of bacon and 2 boiled eggs",
    "500 ml of milk and 2 bananas",
    "0.5 kg of potatoes",
    "7 tsp of sugar and a cup of coffee",
]


def test_aggregation_matches_arbitrary_precision_sums(food_index):
    """resolve_meal totals vs exact rational re-summation, 1e-9 relative."""
    with criterion("aggregation on 20 fixture meals", 5.0):
        assert len(AGGREGATION_MEALS) == 20
        tolerance = Fraction(1, 10**9)
        for text in AGGREGATION_MEALS:
            production = resolve_meal(text, food_index).totals.as_dict()
            exact = meal_totals(text, food_index.records)
            for field, value in production.items():
                expected = exact[field]
                if expected == 0:
                    assert value == 0.0, (text, field)
                else:
                    relative = abs(Fraction(value) - expected) / abs(expected)
                    assert relative <= tolerance, (text, field, float(relative))


def test_end_to_end_deterministic_accuracy(corpus_path, food_index, guidelines):
    """The bundled corpus scores 100% in all seven columns, and the report
    renders in the two-row seven-column accuracy-table shape."""
    with criterion("end-to-end corpus accuracy", 60.0):
        questions = load_corpus(corpus_path)
        assert len(questions) >= 60
        agent_report = run_eval(questions, InProcessTarget(food_index, guidelines))
        for nutrient in NUTRIENT_ORDER:
            assert agent_report.accuracy[nutrient] == 100.0, nutrient
        assert agent_report.error_count == 0

        all_nr = "\n".join(f"{n}: NR" for n in NUTRIENT_ORDER)
        baseline = LlmBaselineTarget(
            ScriptedChatBackend([{"response": all_nr}] * len(questions))
        )
        baseline_report = run_eval(questions, baseline)
        table = render_report([agent_report, baseline_report], "table")
        body_rows = [
            line for line in table.strip().splitlines()
            if line and not set(line) <= {"-", "+", " "}
        ][1:]
        assert len(body_rows) == 2
        assert all(row.count("|") == 7 for row in body_rows)
        csv_text = render_report([agent_report, baseline_report], "csv")
        assert len(csv_text.strip().splitlines()) == 3  # header + 2 systems


def test_orchestrator_contract(food_index, guidelines, sentinel_network):
    """Rule-planner trace shape, step budget, and network isolation."""
    with criterion("orchestrator contract", 10.0):
        agent = deterministic_agent(food_index, guidelines)
        session = agent.new_session()
        for text in ("2 eggs and a cup of rice",
                     "I had a candy bar and a soda",
                     "what about adding 2 slices of pizza?"):
            result = agent.run_turn(session, text)
            actions = [r.plan_step.action for r in result.trace.records]
            assert actions == [LOOKUP_TASK, ASSESS_TASK, FINAL_ACTION], text
            assert len(result.trace.records) <= agent.max_steps

        capped = deterministic_agent(food_index, guidelines, max_steps=1)
        capped_result = capped.run_turn(capped.new_session(), "2 eggs")
        assert len(capped_result.trace.records) <= 1
        assert capped_result.trace.budget_exhausted

        backend = ScriptedChatBackend(SCRIPTED_TURN)
        scripted = llm_agent(food_index, guidelines, backend)
        scripted_result = scripted.run_turn(
            scripted.new_session(), "2 eggs and a cup of rice"
        )
        assert scripted_result.report is not None
        assert [r.plan_step.action for r in scripted_result.trace.records] == [
            LOOKUP_TASK, ASSESS_TASK, FINAL_ACTION,
        ]
        assert backend.calls == 4  # sentinel_network proves none hit a socket


def test_parser_grammar_suite():
    """40+ meal strings parse as specified; normalization is idempotent
    across 10,000 random strings."""
    with criterion("parser grammar suite", 10.0):
        assert len(GRAMMAR_CASES) >= 40
        for text, expected in GRAMMAR_CASES:
            got = [(i.quantity, i.unit, i.name) for i in parse_meal(text)]
            assert got == [(float(q), u, n) for q, u, n in expected], text
            assert all(q > 0 for q, _, _ in got)

        # The table must exercise every canonical unit and every connective.
        from dietagent.mealparse import CANONICAL_UNITS

        units_seen = {u for _, expected in GRAMMAR_CASES for _, u, _ in expected}
        assert units_seen >= set(CANONICAL_UNITS)
        for connective in (",", " and ", " with ", " plus "):
            assert any(connective in text for text, _ in GRAMMAR_CASES), connective

        rng = random.Random(7_000_000)
        alphabet = string.ascii_letters + string.digits + " -'.,!?/éß()"
        checked = 0
        for _ in range(10_000):
            raw = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 40)))
            try:
                once = normalize_name(raw)
            except Exception:
                continue
            assert normalize_name(once) == once, raw
            checked += 1
        assert checked >= 5_000


def test_gateway_conformance(food_index, guidelines):
    """Golden fixtures for every endpoint, including 404/422/409 paths."""
    with criterion("gateway conformance", 20.0):
        client = TestClient(create_app(food_index, guidelines))
        meal = "I had 1 cup rice, 2 eggs, and a glass of milk"

        created = client.post("/v1/sessions")
        assert created.status_code == 201
        sid = created.json()["session_id"]
        assert client.post("/v1/sessions").json()["session_id"] != sid

        assert client.get(f"/v1/sessions/{sid}/trace").json()["records"] == []

        ok = client.post(f"/v1/sessions/{sid}/messages", json={"text": meal})
        assert ok.status_code == 200
        assert len(ok.json()["risk_report"]["labels"]) == 7

        records = client.get(f"/v1/sessions/{sid}/trace").json()["records"]
        assert [r["action"] for r in records] == [LOOKUP_TASK, ASSESS_TASK, FINAL_ACTION]

        empty = client.post(f"/v1/sessions/{sid}/messages", json={"text": " "})
        assert empty.status_code == 422 and empty.json()["code"] == "empty_text"
        missing = client.post("/v1/sessions/none/messages", json={"text": meal})
        assert missing.status_code == 404
        assert client.get("/v1/sessions/none/trace").status_code == 404

        session = client.app.state.sessions[sid]
        assert session.lock.acquire(blocking=False)
        try:
            busy = client.post(f"/v1/sessions/{sid}/messages", json={"text": meal})
            assert busy.status_code == 409
        finally:
            session.lock.release()

        first = client.post("/v1/assess", json={"meal": meal})
        second = client.post("/v1/assess", json={"meal": meal})
        assert first.status_code == 200
        assert first.content == second.content  # byte-stable
        assert client.post("/v1/assess", json={"meal": ""}).status_code == 422
        bad = client.post("/v1/assess", json={"meal": "a plate of stardust"})
        assert bad.status_code == 422 and bad.json()["code"] == "meal_unresolvable"
        partial = client.post("/v1/assess", json={"meal": "2 eggs and a plate of stardust"})
        assert partial.status_code == 200 and len(partial.json()["warnings"]) == 1

        assert client.get("/v1/foods", params={"q": "banana"}).status_code == 200
        assert client.get("/v1/foods", params={"q": "stardust"}).status_code == 404

        health = client.get("/healthz").json()
        assert health["db_foods"] == len(food_index)
        assert health["mode"] == "deterministic"


def test_deterministic_answers_are_fully_grounded(food_index, guidelines):
    """Supporting invariant: no number appears in a deterministic answer
    unless it is present in a data-pipe payload."""
    import json as _json

    agent = deterministic_agent(food_index, guidelines)
    session = agent.new_session()
    result = agent.run_turn(session, "2 slices of pizza and a soda")
    payload_text = _json.dumps([e.payload for e in session.pipe.entries()])
    for number in re.findall(r"\d+(?:\.\d+)?", result.answer):
        assert number in payload_text
