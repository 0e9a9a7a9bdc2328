"""Agent core: task planner, task executor, data pipe, response generator.

Each user turn runs a plan/execute loop. The planner picks the next task
(or Final); the executor runs it, stores the output under a fresh data-pipe
key, and appends a trace record; the response generator turns the collected
payloads into the reply. Two planner/responder stacks exist: a fully
deterministic rule-based one, and an LLM-backed one whose planner speaks a
three-line action format::

    Thought: <free text>
    Action: <task name or Final>
    Action Input: <JSON object, "$pipe:<key>" strings reference stored data>

Task errors never abort a turn; they are captured in the trace and the
planner sees them on its next call.
"""

from __future__ import annotations

import copy
import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field

from .backend import ChatBackend, DEFAULT_MAX_STEPS
from .errors import BackendError, MissingKey, StepBudgetExceeded, UnparseableAction
from .foodkb import FoodIndex, detect_food_content, resolve_meal
from .nutrients import (
    NUTRIENT_ORDER,
    GuidelineSet,
    NutrientVector,
    aggregate,
    assess_risk,
)

FINAL_ACTION = "Final"

LOOKUP_TASK = "meal_nutrition_lookup"
ASSESS_TASK = "diet_risk_assessment"

_PIPE_REF = "$pipe:"


@dataclass(frozen=True)
class TaskDescriptor:
    name: str
    description: str
    input_spec: dict  # parameter name -> short description
    output_kind: str


@dataclass(frozen=True)
class PlanStep:
    thought: str
    action: str  # registered task name or FINAL_ACTION
    action_input: dict = field(default_factory=dict)

    @property
    def is_final(self) -> bool:
        return self.action == FINAL_ACTION


@dataclass(frozen=True)
class DataPipeEntry:
    key: str
    producer: str
    payload: dict
    created_at: float
    seq: int


class DataPipe:
    """Append-only per-session store of task outputs under opaque keys."""

    def __init__(self):
        self._entries: dict[str, DataPipeEntry] = {}
        self._order: list[str] = []

    def __len__(self) -> int:
        return len(self._order)

    def put(self, producer: str, payload: dict) -> str:
        key = f"p{len(self._order):04d}"
        entry = DataPipeEntry(
            key=key,
            producer=producer,
            payload=copy.deepcopy(payload),
            created_at=time.time(),
            seq=len(self._order),
        )
        self._entries[key] = entry
        self._order.append(key)
        return key

    def get(self, key: str) -> dict:
        entry = self._entries.get(key)
        if entry is None:
            raise MissingKey(key)
        return copy.deepcopy(entry.payload)

    def entry(self, key: str) -> DataPipeEntry:
        entry = self._entries.get(key)
        if entry is None:
            raise MissingKey(key)
        return entry

    def entries(self, producer: str | None = None, since_seq: int = 0) -> list[DataPipeEntry]:
        out = [self._entries[k] for k in self._order]
        if producer is not None:
            out = [e for e in out if e.producer == producer]
        return [e for e in out if e.seq >= since_seq]

    def latest(self, producer: str) -> DataPipeEntry | None:
        found = self.entries(producer=producer)
        return found[-1] if found else None


@dataclass
class TraceRecord:
    step_index: int
    plan_step: PlanStep
    task_outcome: dict  # {"status": "success"|"error"|"final", ...}
    duration_ms: float
    created_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return {
            "step_index": self.step_index,
            "thought": self.plan_step.thought,
            "action": self.plan_step.action,
            "action_input": _summarize(self.plan_step.action_input),
            "outcome": self.task_outcome,
            "duration_ms": self.duration_ms,
            "created_at": self.created_at,
        }


@dataclass
class TurnTrace:
    trace_id: str
    records: list = field(default_factory=list)
    budget_exhausted: bool = False
    degraded_response: bool = False

    def to_dict(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "records": [r.to_dict() for r in self.records],
            "budget_exhausted": self.budget_exhausted,
            "degraded_response": self.degraded_response,
        }


def _summarize(value, limit: int = 120) -> str:
    text = json.dumps(value, sort_keys=True, default=str)
    return text if len(text) <= limit else text[: limit - 3] + "..."


class TaskRegistry:
    def __init__(self):
        self._tasks: dict[str, tuple[TaskDescriptor, object]] = {}

    def register(self, descriptor: TaskDescriptor, fn) -> None:
        if descriptor.name in self._tasks:
            raise ValueError(f"task {descriptor.name!r} already registered")
        self._tasks[descriptor.name] = (descriptor, fn)

    def __contains__(self, name: str) -> bool:
        return name in self._tasks

    def __len__(self) -> int:
        return len(self._tasks)

    @property
    def descriptors(self) -> list[TaskDescriptor]:
        return [d for d, _ in self._tasks.values()]

    def get(self, name: str):
        return self._tasks[name]


def resolve_references(value, pipe: DataPipe):
    """Replace "$pipe:<key>" strings by the stored payloads, recursively."""
    if isinstance(value, str) and value.startswith(_PIPE_REF):
        return pipe.get(value[len(_PIPE_REF):])
    if isinstance(value, dict):
        return {k: resolve_references(v, pipe) for k, v in value.items()}
    if isinstance(value, list):
        return [resolve_references(v, pipe) for v in value]
    return value


def execute(step: PlanStep, registry: TaskRegistry, pipe: DataPipe, step_index: int) -> TraceRecord:
    """Run one planned task; failures become error outcomes, never raises."""
    started = time.perf_counter()
    try:
        if step.action not in registry:
            raise BackendError(f"unknown task {step.action!r}")
        _, fn = registry.get(step.action)
        resolved = resolve_references(step.action_input, pipe)
        payload = fn(resolved, pipe)
        key = pipe.put(step.action, payload)
        outcome = {"status": "success", "pipe_key": key}
    except Exception as exc:  # captured: the planner sees the summary next call
        outcome = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
    duration_ms = (time.perf_counter() - started) * 1000.0
    return TraceRecord(
        step_index=step_index, plan_step=step, task_outcome=outcome, duration_ms=duration_ms
    )


# ---------------------------------------------------------------------------
# Planners
# ---------------------------------------------------------------------------

class RulePlanner:
    """Deterministic planner: look up new food content, then assess, then stop."""

    def __init__(self, food_detector):
        self._has_food = food_detector

    def plan(self, history, registry, pipe: DataPipe, turn_records) -> PlanStep:
        latest = next((t["text"] for t in reversed(history) if t["role"] == "user"), "")
        attempted = {r.plan_step.action for r in turn_records}

        if LOOKUP_TASK not in attempted and self._has_food(latest):
            return PlanStep(
                thought="The user mentioned food that has not been looked up yet.",
                action=LOOKUP_TASK,
                action_input={"text": latest},
            )

        last_lookup = pipe.latest(LOOKUP_TASK)
        last_report = pipe.latest(ASSESS_TASK)
        if (
            ASSESS_TASK not in attempted
            and last_lookup is not None
            and (last_report is None or last_report.seq < last_lookup.seq)
        ):
            return PlanStep(
                thought="Nutrition data exists without a risk assessment.",
                action=ASSESS_TASK,
                action_input={"nutrition": _PIPE_REF + last_lookup.key},
            )

        return PlanStep(thought="Nothing left to do.", action=FINAL_ACTION)


_ACTION_RE = re.compile(r"^Action:\s*(.+?)\s*$", re.MULTILINE)
_THOUGHT_RE = re.compile(r"^Thought:\s*(.+?)\s*$", re.MULTILINE)
_ACTION_INPUT_RE = re.compile(r"Action Input:\s*(\{.*?\})\s*(?:$|\n[A-Z])", re.DOTALL)


class LlmPlanner:
    """LLM-backed planner using a branch-then-commit prompting style.

    The prompt asks the model to sketch three candidate next actions with a
    one-line evaluation each, then commit to one in the three-line action
    format. Unparseable replies are re-prompted at most twice.
    """

    def __init__(self, backend: ChatBackend, max_retries: int = 2):
        self._backend = backend
        self._max_retries = max_retries

    def plan(self, history, registry, pipe: DataPipe, turn_records) -> PlanStep:
        messages = self._render_messages(history, registry, pipe, turn_records)
        attempts = 0
        while True:
            reply = self._backend.complete(messages)
            step = self._parse(reply, registry)
            if step is not None:
                return step
            attempts += 1
            if attempts > self._max_retries:
                raise UnparseableAction(reply)
            messages = messages + [
                {"role": "assistant", "content": reply},
                {
                    "role": "user",
                    "content": (
                        "That reply could not be parsed. Answer again with exactly:\n"
                        "Thought: <reasoning>\nAction: <task name or Final>\n"
                        "Action Input: <JSON object>"
                    ),
                },
            ]

    def _render_messages(self, history, registry, pipe, turn_records) -> list[dict]:
        tasks = "\n".join(
            f"- {d.name}: {d.description} Inputs: {json.dumps(d.input_spec)}"
            for d in registry.descriptors
        )
        pipe_lines = "\n".join(
            f"- {e.key}: {e.payload.get('kind', e.producer)} (from {e.producer})"
            for e in pipe.entries()
        ) or "(empty)"
        outcomes = "\n".join(
            f"- step {r.step_index} {r.plan_step.action}: {r.task_outcome}"
            for r in turn_records
        ) or "(none yet)"
        convo = "\n".join(f"{t['role']}: {t['text']}" for t in history)
        system = (
            "You plan the next action for a dietary risk assessment agent. "
            "First list 3 candidate next actions, each with a one-line evaluation "
            "of its merit. Then commit to the best one by ending your reply with "
            "exactly three lines:\n"
            "Thought: <why this action>\n"
            f"Action: <one of the task names, or {FINAL_ACTION}>\n"
            'Action Input: <JSON object; reference stored data as "$pipe:<key>">\n'
            f"Use {FINAL_ACTION} when enough information exists to answer."
        )
        user = (
            f"Available tasks:\n{tasks}\n\nConversation so far:\n{convo}\n\n"
            f"Data pipe:\n{pipe_lines}\n\nSteps already taken this turn:\n{outcomes}"
        )
        return [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ]

    def _parse(self, reply: str, registry: TaskRegistry) -> PlanStep | None:
        actions = _ACTION_RE.findall(reply)
        if not actions:
            return None
        action = actions[-1].strip()
        thoughts = _THOUGHT_RE.findall(reply)
        thought = thoughts[-1].strip() if thoughts else ""
        if action.lower() == FINAL_ACTION.lower():
            return PlanStep(thought=thought, action=FINAL_ACTION)
        if action not in registry:
            return None
        inputs = _ACTION_INPUT_RE.findall(reply)
        if not inputs:
            return None
        try:
            action_input = json.loads(inputs[-1])
        except json.JSONDecodeError:
            return None
        if not isinstance(action_input, dict):
            return None
        return PlanStep(thought=thought, action=action, action_input=action_input)


# ---------------------------------------------------------------------------
# Response generation
# ---------------------------------------------------------------------------

_NUTRIENT_TITLES = {
    "carbohydrate": "Carbohydrate",
    "fat": "Fat",
    "saturated_fat": "Saturated fat",
    "protein": "Protein",
    "sodium": "Sodium",
    "sugars": "Sugars",
    "dietary_fiber": "Dietary fiber",
}

_EXPLAIN_RE = re.compile(r"\b(how|why|explain|trace|which tasks?|computed?|calculated?)\b", re.I)


def render_display(report_dict: dict) -> dict:
    """Two-decimal display strings for a risk report payload.

    Rounding happens only here, after classification; the report keeps the
    full-precision values.
    """
    totals = {k: f"{v:.2f}" for k, v in report_dict["totals"].items()}
    percents = {k: f"{v:.2f}" for k, v in report_dict["percents"].items()}
    return {"totals": totals, "percents": percents, "labels": dict(report_dict["labels"])}


def _format_quantity(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else str(value)


class DeterministicResponder:
    """Template responder; every number it emits comes from a pipe payload."""

    def respond(self, query, turn_payloads, session, turn_records) -> tuple[str, bool]:
        report_payload = next(
            (p for p in reversed(turn_payloads) if p.get("kind") == "risk_report"), None
        )
        resolution = next(
            (p for p in reversed(turn_payloads) if p.get("kind") == "meal_resolution"), None
        )

        if report_payload is not None:
            return self._render_report(report_payload, resolution), False

        if not turn_payloads:
            had_errors = any(r.task_outcome.get("status") == "error" for r in turn_records)
            if had_errors:
                return (
                    "I could not match any foods in that message against my food "
                    "database, so there is nothing to assess. Try naming each item, "
                    "for example: two eggs and a slice of toast.",
                    False,
                )
            if _EXPLAIN_RE.search(query) and len(session.turn_traces) > 0:
                return self._render_trace_summary(session.turn_traces[-1]), False
            return (
                "Tell me what you ate today - for example: two eggs, a cup of rice "
                "and a glass of milk - and I will assess each nutrient against the "
                "dietary guidelines.",
                False,
            )

        # A lookup happened but no assessment; still show what resolved.
        lines = ["I recorded the following items:"]
        lines += self._item_lines(resolution)
        return "\n".join(lines), False

    def _item_lines(self, resolution) -> list[str]:
        lines = []
        if resolution:
            for item in resolution["items"]:
                qty = _format_quantity(item["quantity"])
                unit = "" if item["unit"] == "count" else f" {item['unit']}"
                lines.append(f"- {qty}{unit} {item['name']}")
            for warning in resolution["warnings"]:
                lines.append(f"Note: {warning}")
        return lines

    def _render_report(self, payload, resolution) -> str:
        display = payload["display"]
        totals = display["totals"]
        labels = display["labels"]
        percents = display["percents"]
        lines = []
        if resolution:
            lines.append("I looked up these items:")
            lines += self._item_lines(resolution)
            lines.append("")
        lines.append(
            f"Your day so far adds up to {totals['energy']} kcal. "
            "Here is each nutrient against the guideline thresholds:"
        )
        amount_units = {"sodium": "mg"}
        for nutrient in NUTRIENT_ORDER:
            title = _NUTRIENT_TITLES[nutrient]
            label = labels[nutrient]
            if nutrient in percents:
                lines.append(f"- {title}: {percents[nutrient]}% of energy -> {label}")
            elif nutrient in ("carbohydrate", "fat", "saturated_fat", "protein"):
                lines.append(f"- {title}: energy too low to compute a share -> {label}")
            else:
                unit = amount_units.get(nutrient, "g")
                lines.append(f"- {title}: {totals[nutrient]} {unit} -> {label}")
        risky = [_NUTRIENT_TITLES[n] for n, v in labels.items() if v == "Risky"]
        if risky:
            lines.append(f"Outside the recommended range: {', '.join(risky)}.")
        else:
            lines.append("Everything is within the recommended ranges.")
        return "\n".join(lines)

    def _render_trace_summary(self, trace: TurnTrace) -> str:
        lines = ["Here is how the previous answer was produced:"]
        for record in trace.records:
            action = record.plan_step.action
            if action == FINAL_ACTION:
                lines.append("- the planner decided enough information was available")
                continue
            status = record.task_outcome.get("status")
            if status == "success":
                lines.append(f"- ran {action} and stored its result in the data pipe")
            else:
                lines.append(f"- ran {action}, which failed")
        lines.append(
            "Nutrient totals come from the food knowledge base; each label is the "
            "total compared against the guideline thresholds."
        )
        return "\n".join(lines)


class LlmResponder:
    """Prompts the chat backend; falls back to the deterministic template."""

    def __init__(self, backend: ChatBackend, fallback: DeterministicResponder | None = None):
        self._backend = backend
        self._fallback = fallback or DeterministicResponder()

    def respond(self, query, turn_payloads, session, turn_records) -> tuple[str, bool]:
        summaries = json.dumps(turn_payloads, indent=2, default=str)
        messages = [
            {
                "role": "system",
                "content": (
                    "You are the response generator of a dietary risk assessment "
                    "agent for diabetic users. Answer the user using ONLY the data "
                    "below. Cite only numeric values that appear in the data; do "
                    "not introduce any nutrient numbers of your own. Mention every "
                    "warning present in the data."
                ),
            },
            {
                "role": "user",
                "content": f"User message: {query}\n\nCollected data:\n{summaries}",
            },
        ]
        try:
            return self._backend.complete(messages), False
        except BackendError:
            text, _ = self._fallback.respond(query, turn_payloads, session, turn_records)
            return text, True


# ---------------------------------------------------------------------------
# Sessions and the turn loop
# ---------------------------------------------------------------------------

@dataclass
class AgentSession:
    session_id: str
    created_at: float = field(default_factory=time.time)
    transcript: list = field(default_factory=list)
    turn_traces: list = field(default_factory=list)
    pipe: DataPipe = field(default_factory=DataPipe)
    day_totals: NutrientVector = field(default_factory=NutrientVector)
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class TurnResult:
    answer: str
    trace: TurnTrace
    report: dict | None
    warnings: list


class Agent:
    """plan/execute loop bounded by max_steps, then response generation."""

    def __init__(self, registry: TaskRegistry, planner, responder,
                 max_steps: int = DEFAULT_MAX_STEPS):
        if max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        self.registry = registry
        self.planner = planner
        self.responder = responder
        self.max_steps = max_steps

    def new_session(self) -> AgentSession:
        return AgentSession(session_id=uuid.uuid4().hex)

    def run_turn(self, session: AgentSession, user_text: str) -> TurnResult:
        session.transcript.append({"role": "user", "text": user_text})
        turn_start_seq = len(session.pipe)
        trace = TurnTrace(trace_id=f"t{len(session.turn_traces) + 1:04d}")

        try:
            step_index = 0
            while True:
                if len(trace.records) >= self.max_steps:
                    raise StepBudgetExceeded(
                        f"no Final after {self.max_steps} steps"
                    )
                step = self.planner.plan(
                    session.transcript, self.registry, session.pipe, trace.records
                )
                if step.is_final:
                    trace.records.append(
                        TraceRecord(
                            step_index=step_index,
                            plan_step=step,
                            task_outcome={"status": "final"},
                            duration_ms=0.0,
                        )
                    )
                    break
                trace.records.append(
                    execute(step, self.registry, session.pipe, step_index)
                )
                step_index += 1
        except StepBudgetExceeded:
            trace.budget_exhausted = True

        turn_entries = session.pipe.entries(since_seq=turn_start_seq)
        turn_payloads = [e.payload for e in turn_entries]

        report = next(
            (p["report"] for p in reversed(turn_payloads) if p.get("kind") == "risk_report"),
            None,
        )
        if report is not None:
            session.day_totals = NutrientVector(**report["totals"])

        warnings = list(
            dict.fromkeys(
                w for payload in turn_payloads for w in payload.get("warnings", [])
            )
        )

        answer, degraded = self.responder.respond(
            user_text, turn_payloads, session, trace.records
        )
        trace.degraded_response = degraded

        session.transcript.append({"role": "agent", "text": answer})
        session.turn_traces.append(trace)
        return TurnResult(answer=answer, trace=trace, report=report, warnings=warnings)


# ---------------------------------------------------------------------------
# The standard task set
# ---------------------------------------------------------------------------

def build_registry(index: FoodIndex, guidelines: GuidelineSet,
                   resolver=None) -> TaskRegistry:
    """Register the two domain tasks over a loaded food index.

    ``resolver`` maps meal text to a MealResolution; it defaults to the
    local knowledge base and may be swapped for the remote adapter without
    the planner or executor noticing.
    """
    registry = TaskRegistry()
    resolve = resolver or (lambda text: resolve_meal(text, index))

    def meal_nutrition_lookup(action_input: dict, pipe: DataPipe) -> dict:
        text = action_input.get("text", "")
        resolution = resolve(text)
        return resolution.to_payload(text)

    def diet_risk_assessment(action_input: dict, pipe: DataPipe) -> dict:
        nutrition = action_input.get("nutrition")
        if not isinstance(nutrition, dict) or nutrition.get("kind") != "meal_resolution":
            raise MissingKey("nutrition input must reference a meal_resolution payload")
        # The daily intake is the running union of the session's meals.
        day_vectors = [
            NutrientVector(**e.payload["totals"])
            for e in pipe.entries(producer=LOOKUP_TASK)
        ]
        totals = aggregate(day_vectors)
        report = assess_risk(totals, guidelines)
        report_dict = report.to_dict()
        return {
            "kind": "risk_report",
            "report": report_dict,
            "display": render_display(report_dict),
            "warnings": list(nutrition.get("warnings", [])),
        }

    registry.register(
        TaskDescriptor(
            name=LOOKUP_TASK,
            description=(
                "Parse a free-text meal description and retrieve per-food "
                "nutrient amounts from the food knowledge base, returning item "
                "details and meal totals."
            ),
            input_spec={"text": "the raw meal description"},
            output_kind="meal_resolution",
        ),
        meal_nutrition_lookup,
    )
    registry.register(
        TaskDescriptor(
            name=ASSESS_TASK,
            description=(
                "Compare the day's accumulated nutrient totals against the "
                "dietary guideline thresholds and label each of the seven "
                "nutrients Risky or NotRisky."
            ),
            input_spec={"nutrition": "data-pipe reference to a meal_resolution payload"},
            output_kind="risk_report",
        ),
        diet_risk_assessment,
    )
    return registry


def deterministic_agent(index: FoodIndex, guidelines: GuidelineSet,
                        max_steps: int = DEFAULT_MAX_STEPS, resolver=None) -> Agent:
    """RulePlanner + template responder + local knowledge base."""
    registry = build_registry(index, guidelines, resolver=resolver)
    planner = RulePlanner(lambda text: detect_food_content(text, index))
    return Agent(registry, planner, DeterministicResponder(), max_steps=max_steps)


def llm_agent(index: FoodIndex, guidelines: GuidelineSet, backend: ChatBackend,
              max_steps: int = DEFAULT_MAX_STEPS, resolver=None) -> Agent:
    """LLM planner and responder over the same task registry."""
    registry = build_registry(index, guidelines, resolver=resolver)
    return Agent(
        registry,
        LlmPlanner(backend),
        LlmResponder(backend),
        max_steps=max_steps,
    )
