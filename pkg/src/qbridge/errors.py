"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class QBridgeError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(QBridgeError):
    """Base class for problem-document errors (parse or schema)."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


class SchemaError(SpecError):
    """A field is missing, mistyped, or has a value outside its domain."""


class SpecSyntaxError(SchemaError):
    """The input is not a well-formed UTF-8 JSON document."""


class ShapeError(QBridgeError):
    """A graph or matrix has an invalid shape for the requested operation."""


class PenaltyError(QBridgeError):
    """A constraint penalty is too small for the encoding to be sound."""


class InputError(QBridgeError):
    """A scalar input lies outside the admissible range."""


class DimensionError(QBridgeError):
    """Vector or state dimensions do not match."""


class SizeError(QBridgeError):
    """A problem exceeds a hard size cap (enumeration, simulation, builders)."""


class UnboundParameterError(QBridgeError):
    """A circuit still has free parameter slots."""


class UnsupportedGateError(QBridgeError):
    """No decomposition rule lowers a gate into the target gate set."""


class LayoutError(QBridgeError):
    """The device does not have enough physical qubits."""


class CatalogError(QBridgeError):
    """A device catalog failed validation."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{path}: {message}")


class NoEligibleDeviceError(QBridgeError):
    """No catalog device can run the circuit."""


class NonClassicalOutputError(QBridgeError):
    """An arithmetic circuit did not end in a single computational basis state."""
