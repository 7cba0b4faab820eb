"""Exception hierarchy shared by every armplan module.

Each exception carries a stable ``code`` string that survives serialization
across the HTTP service and the CLI, so clients can dispatch on it without
depending on Python class identities.
"""

from __future__ import annotations


class PlannerError(Exception):
    """Base class for all armplan errors."""

    #: Stable error code; defaults to the class name.
    code = "PlannerError"

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if "code" not in cls.__dict__:
            cls.code = cls.__name__


class RobotSpecError(PlannerError):
    """Malformed robot or scene document (unparseable / wrong structure)."""

    code = "SyntaxError"


class RobotValidationError(PlannerError):
    """Structurally valid document that violates a model invariant."""

    code = "ValidationError"


class DimensionMismatch(PlannerError):
    """Configuration length does not match the robot's joint count."""


class UnknownRobot(PlannerError):
    pass


class UnknownName(PlannerError):
    pass


class DuplicateName(PlannerError):
    pass


class MissingAssignment(PlannerError):
    """A multi-robot call omitted a start or goal for a bound robot."""


class WorldFrozen(PlannerError):
    """Mutation attempted on a frozen scene or during an in-flight plan."""


class OutOfLimits(PlannerError):
    """Configuration outside the joint limits."""


class StateInCollision(PlannerError):
    pass


class KindMismatch(PlannerError):
    """Goal constraint kind incompatible with the requested operation."""


class GoalInOccupiedVoxel(PlannerError):
    pass


class OutOfBounds(PlannerError):
    pass


class StartInvalid(PlannerError):
    """Start configuration out of limits or in collision."""


class StartsInCollision(PlannerError):
    """Joint multi-robot start state is not collision-free."""


class NoPathExists(PlannerError):
    """Search space exhausted without reaching the goal."""


class PlanningTimeout(PlannerError):
    code = "Timeout"


class InvalidWorkerCount(PlannerError):
    pass


class LatticeTooLarge(PlannerError):
    """Lattice exceeds the enumeration cap of the exhaustive oracle."""


class UnknownPlannerId(PlannerError):
    pass


class ArityMismatch(PlannerError):
    """Robot list incompatible with the selected planner (single vs multi)."""


class InvalidVmax(PlannerError):
    pass


class EmptyInput(PlannerError):
    pass


class ZeroMean(PlannerError):
    pass


class AllFailed(PlannerError):
    """Every planner failed on a problem; runtime ratios are undefined."""


class ScenarioInvalid(PlannerError):
    pass
