"""Corpus evaluation: per-nutrient accuracy of the agent's risk labels.

A corpus is a JSON Lines file of questions::

    {"id": "q001", "question": "I ate ...",
     "ground_truth": {"carbohydrate": "R", ..., "dietary_fiber": "NR"}}

Each question runs in a fresh session against a target (the in-process
deterministic stack, a running gateway, or an LLM baseline); the seven
labels of the turn's risk report are compared column-wise to ground truth.
Indeterminate labels and pipeline errors count as mismatches. The report
renders as a text table, CSV, or JSON, one row per evaluated system, with
an accuracy bar chart written alongside the delimited output.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .backend import ChatBackend
from .errors import BackendError, DietAgentError, SchemaViolation
from .foodkb import FoodIndex
from .nutrients import NUTRIENT_ORDER, GuidelineSet
from .oracle import label_meal
from .orchestrator import deterministic_agent

_LABEL_CODES = {"Risky": "R", "NotRisky": "NR", "Indeterminate": "IND"}

_COLUMN_TITLES = {
    "carbohydrate": "Carbohydrate",
    "fat": "Fat",
    "saturated_fat": "Saturated Fat",
    "protein": "Protein",
    "sodium": "Sodium",
    "sugars": "Sugars",
    "dietary_fiber": "Dietary Fiber",
}


@dataclass(frozen=True)
class EvalQuestion:
    id: str
    question: str
    ground_truth: dict  # nutrient -> "R" | "NR", all seven present

    def to_line(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "question": self.question,
                "ground_truth": {n: self.ground_truth[n] for n in NUTRIENT_ORDER},
            }
        )


def load_corpus(path) -> list:
    questions = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(line_no, f"invalid JSON: {exc}") from exc
            try:
                truth = doc["ground_truth"]
                if set(truth) != set(NUTRIENT_ORDER):
                    raise SchemaViolation(
                        line_no, f"ground_truth must cover {list(NUTRIENT_ORDER)}"
                    )
                bad = {v for v in truth.values() if v not in ("R", "NR")}
                if bad:
                    raise SchemaViolation(line_no, f"labels must be R or NR, got {bad}")
                questions.append(
                    EvalQuestion(
                        id=str(doc["id"]),
                        question=str(doc["question"]),
                        ground_truth={n: truth[n] for n in NUTRIENT_ORDER},
                    )
                )
            except KeyError as exc:
                raise SchemaViolation(line_no, f"missing field {exc}") from exc
    return questions


@dataclass
class EvalReport:
    """Accuracy per nutrient for one evaluated system."""

    system: str
    n_questions: int
    accuracy: dict  # nutrient -> percent, 0..100
    matches: list = field(default_factory=list)  # per-question match matrix rows
    indeterminate_count: int = 0
    error_count: int = 0

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "n_questions": self.n_questions,
            "accuracy": {n: self.accuracy[n] for n in NUTRIENT_ORDER},
            "matches": self.matches,
            "indeterminate_count": self.indeterminate_count,
            "error_count": self.error_count,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        return cls(
            system=doc["system"],
            n_questions=doc["n_questions"],
            accuracy=dict(doc["accuracy"]),
            matches=list(doc["matches"]),
            indeterminate_count=doc["indeterminate_count"],
            error_count=doc["error_count"],
        )


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------

class InProcessTarget:
    """The deterministic stack, one fresh session per question."""

    name = "deterministic-agent"

    def __init__(self, index: FoodIndex, guidelines: GuidelineSet):
        self._agent = deterministic_agent(index, guidelines)

    def labels_for(self, question: str) -> dict | None:
        session = self._agent.new_session()
        result = self._agent.run_turn(session, question)
        if result.report is None:
            return None
        return {n: _LABEL_CODES[v] for n, v in result.report["labels"].items()}


class HttpTarget:
    """A running gateway, addressed over HTTP."""

    def __init__(self, base_url: str, timeout: float = 30.0):
        import requests

        self._requests = requests
        self._base = base_url.rstrip("/")
        self._timeout = timeout
        self.name = f"gateway@{base_url}"

    def labels_for(self, question: str) -> dict | None:
        created = self._requests.post(f"{self._base}/v1/sessions", timeout=self._timeout)
        created.raise_for_status()
        session_id = created.json()["session_id"]
        reply = self._requests.post(
            f"{self._base}/v1/sessions/{session_id}/messages",
            json={"text": question},
            timeout=self._timeout,
        )
        if reply.status_code != 200:
            return None
        report = reply.json().get("risk_report")
        if not report:
            return None
        return {n: _LABEL_CODES[v] for n, v in report["labels"].items()}


_BASELINE_LINE = re.compile(
    r"(carbohydrate|fat|saturated[ _]fat|protein|sodium|sugars|dietary[ _]fiber)\s*[:=-]\s*"
    r"(risky|not[ _able]*risky|nr|r)\b",
    re.I,
)


class LlmBaselineTarget:
    """Plain chat-model baseline: one customized prompt, seven labels parsed
    from the reply. Informational only; never part of acceptance."""

    name = "llm-baseline"

    def __init__(self, backend: ChatBackend):
        self._backend = backend

    def labels_for(self, question: str) -> dict | None:
        prompt = (
            "Estimate the nutritional content of the foods in the message below "
            "and assess a full day's intake against these guidelines for a "
            "diabetic adult: dietary fiber 20-35 g; sodium at most 2300 mg; "
            "sugars at most 25 g; carbohydrate under 45% of energy; protein "
            "15-20% of energy; fat 20-35% of energy; saturated fat under 10% "
            "of energy. Reply with exactly seven lines, one per nutrient, in "
            "this order and format:\n"
            "carbohydrate: R or NR\nfat: R or NR\nsaturated_fat: R or NR\n"
            "protein: R or NR\nsodium: R or NR\nsugars: R or NR\n"
            "dietary_fiber: R or NR\n\n"
            f"Message: {question}"
        )
        try:
            reply = self._backend.complete([{"role": "user", "content": prompt}])
        except BackendError:
            return None
        labels = {}
        for raw_name, raw_label in _BASELINE_LINE.findall(reply):
            nutrient = raw_name.lower().replace(" ", "_")
            label = "NR" if "n" in raw_label.lower() else "R"
            labels[nutrient] = label
        if set(labels) != set(NUTRIENT_ORDER):
            return None
        return labels


# ---------------------------------------------------------------------------
# Harness
# ---------------------------------------------------------------------------

def run_eval(questions: list, target) -> EvalReport:
    """Submit every question to the target and score the label columns."""
    matches = []
    hits = {n: 0 for n in NUTRIENT_ORDER}
    indeterminate = 0
    errors = 0
    for question in questions:
        try:
            labels = target.labels_for(question.question)
        except DietAgentError:
            labels = None
        if labels is None:
            errors += 1
            row = {n: False for n in NUTRIENT_ORDER}
            matches.append({"id": question.id, "outcome": "error", "columns": row})
            continue
        indeterminate += sum(1 for v in labels.values() if v == "IND")
        row = {n: labels[n] == question.ground_truth[n] for n in NUTRIENT_ORDER}
        for n, ok in row.items():
            hits[n] += ok
        matches.append({"id": question.id, "outcome": "ok", "columns": row})
    n = len(questions)
    accuracy = {k: (100.0 * v / n if n else 0.0) for k, v in hits.items()}
    return EvalReport(
        system=target.name,
        n_questions=n,
        accuracy=accuracy,
        matches=matches,
        indeterminate_count=indeterminate,
        error_count=errors,
    )


def render_report(reports: list, fmt: str = "table") -> str:
    """Accuracy rows, one per system, columns in the fixed nutrient order.

    Table and CSV round percents to whole numbers; JSON keeps full values
    and round-trips losslessly through EvalReport.from_dict.
    """
    if fmt == "json":
        return json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2)
    if fmt == "csv":
        header = "system," + ",".join(NUTRIENT_ORDER)
        rows = [
            r.system + "," + ",".join(f"{round(r.accuracy[n])}" for n in NUTRIENT_ORDER)
            for r in reports
        ]
        return "\n".join([header] + rows) + "\n"
    if fmt == "table":
        titles = [_COLUMN_TITLES[n] for n in NUTRIENT_ORDER]
        name_width = max([len("system")] + [len(r.system) for r in reports])
        widths = [max(len(t), 4) for t in titles]
        lines = [
            " | ".join(["system".ljust(name_width)] + [t.rjust(w) for t, w in zip(titles, widths)])
        ]
        lines.append("-+-".join(["-" * name_width] + ["-" * w for w in widths]))
        for r in reports:
            cells = [f"{round(r.accuracy[n])}%".rjust(w) for n, w in zip(NUTRIENT_ORDER, widths)]
            lines.append(" | ".join([r.system.ljust(name_width)] + cells))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def render_figure(reports: list, path) -> None:
    """Grouped bar chart of per-nutrient accuracy, written to an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(9, 4.5))
    positions = range(len(NUTRIENT_ORDER))
    width = 0.8 / max(len(reports), 1)
    for i, report in enumerate(reports):
        offsets = [p + i * width for p in positions]
        values = [report.accuracy[n] for n in NUTRIENT_ORDER]
        ax.bar(offsets, values, width=width, label=report.system)
    ax.set_xticks([p + width * (len(reports) - 1) / 2 for p in positions])
    ax.set_xticklabels([_COLUMN_TITLES[n] for n in NUTRIENT_ORDER], rotation=20, ha="right")
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 105)
    ax.legend()
    ax.set_title("Per-nutrient risk label accuracy")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def make_ground_truth(raw_questions: list, records) -> tuple:
    """Label questions with the independent oracle.

    ``raw_questions`` are {"id", "question"} mappings. Returns
    (questions, flagged): questions whose meals resolve get binary labels;
    unresolvable or energy-degenerate ones land in ``flagged`` with the
    reason, excluded from emission.
    """
    questions = []
    flagged = []
    for raw in raw_questions:
        text = raw["question"]
        try:
            labels = label_meal(text, records)
        except DietAgentError as exc:
            flagged.append({"id": raw["id"], "reason": str(exc)})
            continue
        if "IND" in labels.values():
            flagged.append({"id": raw["id"], "reason": "percent rules indeterminate"})
            continue
        questions.append(
            EvalQuestion(id=str(raw["id"]), question=text, ground_truth=labels)
        )
    return questions, flagged


def save_corpus(questions: list, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for question in questions:
            fh.write(question.to_line() + "\n")
