class PlanningError(Exception):
    """Base class for planner failures."""


class DegenerateDurationError(PlanningError, ValueError):
    """A duration-dependent quantity was requested at a non-positive duration."""


class NoSolutionError(PlanningError):
    """The steering problem has no solution within the iteration limits."""


class InvalidStartError(PlanningError):
    """The start state lies inside an (inflated) obstacle."""


class ScenarioError(ValueError):
    """A scenario file failed validation; ``field`` names the failing entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
