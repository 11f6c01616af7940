"""Exception types. Every error carries a short machine-readable ``code``."""


class IsofillError(Exception):
    code = "ERROR"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self):
        return f"[{self.code}] {super().__str__()}"


class SpecError(IsofillError):
    """Malformed or invalid manifold specification."""

    code = "INVALID_SPEC"


class ParseError(SpecError):
    code = "PARSE_ERROR"


class StructureError(IsofillError):
    """The algebra does not satisfy the structure theory numerically."""

    code = "STRUCTURE"


class GeometryError(IsofillError):
    code = "GEOMETRY"


class ChainError(IsofillError):
    code = "CHAIN"


class FillingError(IsofillError):
    code = "FILLING"
