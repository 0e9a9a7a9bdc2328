"""Exception types shared across the package."""


class DietAgentError(Exception):
    """Base class for all errors raised by this package."""


class InvalidQuantity(DietAgentError):
    """A nutrient amount is negative, non-finite, or otherwise unusable."""


class UnitMismatch(DietAgentError):
    """A value was supplied in a unit the rule does not use."""


class EmptyMeal(DietAgentError):
    """Meal text is empty, whitespace, or contains nothing parseable."""


class MalformedItem(DietAgentError):
    """A meal item has no usable food name or a non-positive quantity."""

    def __init__(self, position: int, message: str = "malformed item"):
        super().__init__(f"{message} (item {position})")
        self.position = position


class SchemaViolation(DietAgentError):
    """A food database line does not match the documented schema."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateAlias(DietAgentError):
    """The same name or alias maps to more than one food record."""

    def __init__(self, name: str):
        super().__init__(f"duplicate name/alias: {name!r}")
        self.name = name


class FoodNotFound(DietAgentError):
    """No record matches the requested food name."""

    def __init__(self, name: str):
        super().__init__(f"no food record for {name!r}")
        self.name = name


class UnknownUnit(DietAgentError):
    """The matched record has no serving entry for the requested unit."""

    def __init__(self, name: str, unit: str):
        super().__init__(f"{name!r} has no serving size for unit {unit!r}")
        self.name = name
        self.unit = unit


class MealUnresolvable(DietAgentError):
    """Every item in the meal failed to resolve."""


class NetworkError(DietAgentError):
    """The remote nutrition service could not be reached."""


class AuthError(DietAgentError):
    """Remote nutrition credentials are missing or rejected."""


class UnparseableResponse(DietAgentError):
    """The remote nutrition service returned a body we cannot interpret."""


class BackendError(DietAgentError):
    """The chat-completion backend failed or returned an unusable reply."""


class UnparseableAction(DietAgentError):
    """The planner reply did not contain a valid action after retries."""

    def __init__(self, raw_reply: str):
        super().__init__(f"unparseable planner action: {raw_reply[:200]!r}")
        self.raw_reply = raw_reply


class StepBudgetExceeded(DietAgentError):
    """The planner loop hit its step budget without emitting Final."""


class MissingKey(DietAgentError):
    """An action input referenced a data-pipe key that does not exist."""

    def __init__(self, key: str):
        super().__init__(f"no data-pipe entry for key {key!r}")
        self.key = key
