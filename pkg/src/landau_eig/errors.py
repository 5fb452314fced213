"""Exception types raised by the solvers."""


class LemmaViolationError(ArithmeticError):
    """A structural property that must hold for the coupling matrix failed."""


class ResonanceError(ArithmeticError):
    """A Fourier mode of the off-resonant solve is (nearly) singular."""

    def __init__(self, n, cond):
        super().__init__(f"mode n={n} is resonant (condition number {cond:.3g})")
        self.n = n
        self.cond = cond


class SeriesDivergenceError(ArithmeticError):
    """A power series in cosine-series arithmetic did not converge."""


class AccuracyError(ArithmeticError):
    """A numerical estimate missed its requested accuracy."""


class NoContractionError(ArithmeticError):
    """The fixed-point iteration stopped contracting."""


class NonConvergenceError(ArithmeticError):
    """The fixed-point iteration ran out of iterations."""


class TruncationError(ArithmeticError):
    """The finite Landau basis is too small for the requested accuracy."""


class TruncationWarning(UserWarning):
    """Amplitude was pushed outside the finite Landau basis."""
