"""Exception taxonomy shared by all bubblemodes modules.

Every failure mode raised by the library derives from BubbleModelError so
callers (and the CLI) can distinguish model errors from programming errors.
"""


class BubbleModelError(Exception):
    """Base class for all library errors."""


class NonPositive(BubbleModelError):
    """A parameter that must be positive (or nonnegative) is not."""

    def __init__(self, field, value):
        self.field = field
        self.value = value
        super().__init__(f"parameter {field!r} must be positive, got {value!r}")


class GammaInconsistent(BubbleModelError):
    """Adiabatic index does not match 1 + R_gas / c_v."""

    def __init__(self, observed, expected):
        self.observed = observed
        self.expected = expected
        super().__init__(
            f"gamma = {observed!r} inconsistent with 1 + R_gas/c_v = {expected!r}"
        )


class SigmaZero(BubbleModelError):
    """Equilibrium construction requested with zero surface tension."""


class NoPositiveRoot(BubbleModelError):
    """The equilibrium cubic presented no positive root (internal failure)."""


class ConvergenceFailure(BubbleModelError):
    """An iterative solver failed to reach its tolerance."""


class IndexInvalid(BubbleModelError):
    """Spherical-harmonic index outside ell >= 0, |m| <= ell."""


class GridTooCoarse(BubbleModelError):
    """Grid resolution below what the requested operation needs."""


class RadiusInsideBubble(BubbleModelError):
    """Exterior multipole evaluation requested at r < 1."""


class ModeNotOscillatory(BubbleModelError):
    """Lamb frequency requested for ell in {0, 1}."""


class ViscosityNonzero(BubbleModelError):
    """Inviscid stepper called with mu_l != 0."""


class LinearSolveFailure(BubbleModelError):
    """A dense linear solve failed (singular or ill-conditioned matrix)."""


class StabilityViolation(BubbleModelError):
    """State norm grew more than tenfold over a single step."""


class SeriesTooShort(BubbleModelError):
    """Decay-rate fit asked of a series with too few samples or e-folds."""


class NotDecayingError(BubbleModelError):
    """A decay certificate found a non-decreasing sup-norm sequence."""


class BoundaryNonzero(BubbleModelError):
    """Dirichlet heat data does not vanish at r = 1."""


class TruncationInsufficient(BubbleModelError):
    """Eigen-expansion tail energy above tolerance at the configured N_terms."""


class CompatibilityViolated(BubbleModelError):
    """Neumann compatibility residual for the ell = 0 potential too large."""

    def __init__(self, residual, tol):
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"Neumann compatibility residual {residual:.3e} exceeds {tol:.1e}"
        )


class InsufficientRadii(BubbleModelError):
    """Far-field slope fit needs at least three radii, all >= 4."""


class SeriesEmpty(BubbleModelError):
    """A verifier received an empty time series."""


class ConfigInvalid(BubbleModelError):
    """A run configuration file is missing keys or holds unusable values."""


class ViscousGeneralDataRejected(BubbleModelError):
    """Viscous run rejected because non-radial coefficients are present.

    Carries the per-mode compatibility report explaining the obstruction.
    """

    def __init__(self, report):
        self.report = report
        bad = [e for e in report.entries if not e.compatible]
        super().__init__(
            "viscous evolution requires theta/phi-independent data; "
            f"{len(bad)} mode(s) with ell >= 1 carry nonzero coefficients"
        )
