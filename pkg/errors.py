"""
Exception hierarchy shared by every service module.

Each class carries the process exit code the CLI reports for it, so
main.py can turn any failure into a result dict without a lookup table.
"""


class BranchspaceError(Exception):
    exit_code = 1


# ---- Bad input (exit 2) ----

class InputError(BranchspaceError):
    exit_code = 2


class GraphSyntaxError(InputError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class GraphValidationError(InputError):
    pass


class UnknownNameError(InputError):
    pass


class SingularMatrixError(InputError):
    pass


class NotNegativeDefiniteError(InputError):
    def __init__(self, index, minor):
        super().__init__(
            f"intersection form is not negative definite: "
            f"leading minor {index} of -I equals {minor}"
        )
        self.index = index
        self.minor = minor


# ---- Hypothesis failures (exit 3) ----

class HypothesisError(BranchspaceError):
    exit_code = 3


class NotATreeError(HypothesisError):
    pass


class ReducibleHyperplaneError(HypothesisError):
    pass


class UnsupportedComparisonError(HypothesisError):
    pass


class NotUltrametricError(HypothesisError):
    pass


# ---- Internal failures ----

class CrossCheckError(BranchspaceError):
    exit_code = 4


class PropertyFailure(BranchspaceError):
    exit_code = 5

    def __init__(self, message, reproducer=None):
        super().__init__(message)
        self.reproducer = reproducer
