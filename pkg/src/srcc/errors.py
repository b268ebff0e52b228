"""Exception hierarchy shared across the package."""


class SrccError(Exception):
    """Base class for all package-specific errors."""


class NonHermitianInput(SrccError):
    pass


class ConvergenceFailure(SrccError):
    pass


class DefectiveMatrix(SrccError):
    pass


class NonFiniteState(SrccError):
    pass


class EmptySuperposition(SrccError):
    pass


class DimensionMismatch(SrccError):
    pass


class IndexOutOfRange(SrccError):
    pass


class NoConvergence(SrccError):
    def __init__(self, max_iter, residual=None):
        self.max_iter = max_iter
        self.residual = residual
        msg = f"amplitude iteration did not converge within {max_iter} steps"
        if residual is not None:
            msg += f" (last residual norm {residual:.3e})"
        super().__init__(msg)


class SingularDenominator(SrccError):
    pass


class NearResonantDenominator(SrccError):
    """A sum-over-states denominator fell below the safety threshold."""

    def __init__(self, triple, value):
        self.triple = triple
        self.value = value
        super().__init__(
            f"near-resonant denominator {value:.3e} hartree for state triple {triple}"
        )


class GridMismatch(SrccError):
    pass


class ConfigParse(SrccError):
    pass


class ScenarioFailure(SrccError):
    pass
