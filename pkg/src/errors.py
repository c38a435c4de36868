"""
Error types for tqftkit
Every failure carries a machine-readable code and the process exit code used by the CLI
"""

from typing import Any, Dict, Optional


DOMAIN_EXIT_CODE = 2
INPUT_EXIT_CODE = 1


class TqftkitError(ValueError):
    """Base class for all library errors."""

    code = "tqftkit_error"
    exit_code = DOMAIN_EXIT_CODE

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"code": self.code, "message": self.message}
        if self.details:
            payload["details"] = self.details
        return payload


class NotEighthRootForm(TqftkitError):
    code = "not_eighth_root_form"


class SingularMatrix(TqftkitError):
    code = "singular_matrix"


class ShapeMismatch(TqftkitError):
    code = "shape_mismatch"


class DegenerateForm(TqftkitError):
    code = "degenerate_form"


class DegenerateLattice(TqftkitError):
    code = "degenerate_lattice"


class WellDefinednessFailure(TqftkitError):
    code = "well_definedness_failure"


class BadSymmetrization(TqftkitError):
    code = "bad_symmetrization"


class NotACharacter(TqftkitError):
    code = "not_a_character"


class SingularTrace(TqftkitError):
    code = "singular_trace"


class TooLarge(TqftkitError):
    code = "too_large"


class NonAbelian(TqftkitError):
    code = "non_abelian"


class NonIntegerDimension(TqftkitError):
    code = "non_integer_dimension"


class IncompatibleSystems(TqftkitError):
    code = "incompatible_systems"


class InvalidCocycle(TqftkitError):
    code = "invalid_cocycle"


class InvalidGroup(TqftkitError):
    code = "invalid_group"


class VerificationFailure(TqftkitError):
    """A cross-check between two independent routes disagreed."""

    code = "verification_failed"


class ParseError(TqftkitError):
    code = "parse_error"
    exit_code = INPUT_EXIT_CODE


class SchemaError(TqftkitError):
    code = "schema_error"
    exit_code = INPUT_EXIT_CODE
