"""Exception hierarchy shared by the library and the CLI.

Every error carries a short machine-readable ``code`` so the command line
front end can emit a structured error object and exit with status 2.
"""


class NilspectraError(Exception):
    code = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        return {"error": self.code, "message": str(self), "details": _plain(self.details)}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (int, float, str, bool)) or obj is None:
        return obj
    return str(obj)


class MalformedAlgebra(NilspectraError):
    code = "malformed-algebra"


class JacobiViolation(MalformedAlgebra):
    code = "jacobi-violation"


class GradationViolation(MalformedAlgebra):
    code = "gradation-violation"


class AlgebraMismatch(NilspectraError):
    code = "algebra-mismatch"


class UnsupportedStep(NilspectraError):
    code = "unsupported-step"


class NotAnAutomorphism(NilspectraError):
    code = "not-an-automorphism"


class InvalidWeights(NilspectraError):
    code = "invalid-weights"


class InvalidParameter(NilspectraError):
    code = "invalid-parameter"


class UnsupportedAlgebra(NilspectraError):
    code = "unsupported"


class NotHomogeneous(NilspectraError):
    code = "not-homogeneous"


class InvalidFunction(NilspectraError):
    code = "invalid-function"


class NotConverged(NilspectraError):
    code = "not-converged"


class TooFewPoints(NilspectraError):
    code = "too-few-points"


class IncompatibleOperands(NilspectraError):
    code = "incompatible-operands"


class InvalidChart(NilspectraError):
    code = "invalid-chart"


class DegenerateOrbit(NilspectraError):
    code = "degenerate-orbit"


class DegenerateRepresentation(NilspectraError):
    code = "degenerate-representation"


class InvalidGrid(NilspectraError):
    code = "invalid-grid"


class InvalidForm(NilspectraError):
    code = "invalid-form"
