"""Exception hierarchy shared by all hyperstruct modules."""
from __future__ import annotations


class HyperstructError(Exception):
    """Base class for every error raised by hyperstruct."""


# -- structure construction / editing ---------------------------------------

class StructureError(HyperstructError):
    """A structural rule of a hyperstructure was broken."""

    rule = "Structure"

    def __init__(self, message: str, bond=None):
        super().__init__(message)
        self.bond = bond


class EmptyBoundary(StructureError):
    rule = "EmptyBoundary"


class DanglingReference(StructureError):
    rule = "DanglingReference"


class LevelSkew(StructureError):
    rule = "LevelSkew"


class DuplicateId(StructureError):
    rule = "DuplicateId"


class MissingBoundary(StructureError):
    rule = "MissingBoundary"


class EmptyLevel(StructureError):
    rule = "EmptyLevel"


class MonotoneDim(StructureError):
    rule = "MonotoneDim"


class UnknownBond(StructureError):
    rule = "UnknownBond"


class LevelZero(StructureError):
    rule = "LevelZero"


class EmptyMembers(StructureError):
    rule = "EmptyMembers"


class MixedLevels(StructureError):
    rule = "MixedLevels"


class StillReferenced(StructureError):
    rule = "StillReferenced"


class CarrierMismatch(StructureError):
    rule = "CarrierMismatch"


class NotTopLevel(StructureError):
    rule = "NotTopLevel"


class AmbiguousTop(StructureError):
    """More than one top-level bond where a single global bond is needed."""

    rule = "AmbiguousTop"


RULE_ERRORS = {
    cls.rule: cls
    for cls in (
        EmptyBoundary, DanglingReference, LevelSkew, DuplicateId,
        MissingBoundary, EmptyLevel, MonotoneDim, UnknownBond,
    )
}


# -- globalizer --------------------------------------------------------------

class GlobalizerError(HyperstructError):
    pass


class MissingProperty(GlobalizerError):
    def __init__(self, bond):
        super().__init__(f"no level-0 property for {bond}")
        self.bond = bond


class MissingAggregator(GlobalizerError):
    pass


class MissingRefiner(GlobalizerError):
    pass


class RefinerConflict(GlobalizerError):
    def __init__(self, bond, first, second):
        super().__init__(f"{bond} received conflicting targets {first!r} and {second!r}")
        self.bond = bond
        self.targets = (first, second)


class NotFound(GlobalizerError):
    pass


class InfiniteAlphabet(GlobalizerError):
    pass


# -- brunnian ----------------------------------------------------------------

class DegenerateBond(HyperstructError):
    pass


class InvalidComplex(HyperstructError):
    def __init__(self, report):
        super().__init__("; ".join(v.message for v in report.violations))
        self.report = report


class CyclicSubfaces(HyperstructError):
    pass


# -- constructors ------------------------------------------------------------

class SubsetTooLarge(HyperstructError):
    pass


class EnumerationOverflow(HyperstructError):
    pass


class MissingRule(HyperstructError):
    pass


class GoalNotMet(HyperstructError):
    def __init__(self, achieved, products):
        super().__init__(f"goal not met; achieved {achieved!r}")
        self.achieved = achieved
        self.products = products


class EmptyPlan(HyperstructError):
    pass


# -- persistence -------------------------------------------------------------

class BuilderFailure(HyperstructError):
    def __init__(self, parameter, cause: BaseException):
        super().__init__(f"builder failed at parameter {parameter!r}: {cause}")
        self.parameter = parameter
        self.cause = cause


# -- serialization -----------------------------------------------------------

class ParseError(HyperstructError):
    pass


class SchemaError(HyperstructError):
    pass


class ValidationError(HyperstructError):
    def __init__(self, report):
        first = report.violations[0] if report.violations else None
        super().__init__(f"{first.rule}: {first.message}" if first else "invalid structure")
        self.report = report

    @property
    def rules(self) -> list[str]:
        return [v.rule for v in self.report.violations]
