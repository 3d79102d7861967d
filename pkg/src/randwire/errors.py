"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A user-supplied parameter is outside its documented domain."""


class ContractError(ValueError):
    """A caller violated an API contract (e.g. missing indexing metadata)."""


class StructuralError(RuntimeError):
    """A graph edit would leave the network structurally unusable."""


class SchemaError(ValueError):
    """A serialized artifact does not match the expected schema/version."""


class NonFiniteError(ArithmeticError):
    """A NaN or Inf appeared during numerical execution."""
