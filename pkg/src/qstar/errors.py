"""Exception hierarchy for qstar."""


class QStarError(Exception):
    """Base class for all errors raised by qstar."""


class SizeError(QStarError, ValueError):
    """A size or dimension argument is out of the supported range."""


class DimensionMismatchError(QStarError, ValueError):
    """Operands do not live in compatible spaces."""


class ClosureError(QStarError):
    """A product or adjoint left the span of the algebra basis.

    Signals a malformed algebra rather than a user mistake.
    """

    def __init__(self, msg, residual):
        super().__init__(f"{msg} (relative residual {residual:.3e})")
        self.residual = residual


class PositivityError(QStarError, ValueError):
    """A matrix or functional that must be positive is not."""


class RepresentabilityError(QStarError):
    """The functional violates one of the (L1)-(L3) conditions."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class IllPosedError(QStarError):
    """A least-squares solve that should be exact left a large residual."""

    def __init__(self, msg, residual):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


class DegenerateGeneratorError(QStarError):
    """The generator b spans the zero subspace, i.e. omega(b*b) vanishes."""

    def __init__(self, norm_squared):
        super().__init__(f"degenerate generator: omega(b*b) = {norm_squared:.3e}")
        self.norm_squared = norm_squared


class NumericalFailureError(QStarError):
    """A construction that is exact in theory failed a residual check."""

    def __init__(self, msg, residual):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


class SingularStateError(QStarError):
    """The reference state is not faithful, so rho^{-1/2} does not exist."""


class UnsupportedStructureError(QStarError):
    """The closed-form path needs a full matrix algebra."""


class NotHermitianError(QStarError, ValueError):
    pass


class NotWellDefinedError(QStarError):
    """The induced derivation is not well defined: ker(pi) is not preserved."""

    def __init__(self, certificate, witness):
        super().__init__(
            f"induced derivation not well defined: |pi(delta(a))| = {certificate:.3e} on ker(pi)"
        )
        self.certificate = certificate
        self.witness = witness


class DerivationInconsistencyError(QStarError):
    """The identity b* d(a) b = d(b*ab) - d(b*)ab - b*a d(b) failed."""

    def __init__(self, residual):
        super().__init__(f"derivation identity violated (residual {residual:.3e})")
        self.residual = residual


class NotGeneratingError(QStarError):
    """The candidate generating set does not generate the full algebra."""

    def __init__(self, generated_dim, full_dim):
        super().__init__(
            f"generators span a *-algebra of dimension {generated_dim}, expected {full_dim}"
        )
        self.generated_dim = generated_dim
        self.full_dim = full_dim


class NotAProjectionError(QStarError, ValueError):
    pass


class RegionError(QStarError, ValueError):
    """Invalid lattice region, site index or region relation."""


class FrameError(QStarError, ValueError):
    """A direction or triad is not unit / orthonormal / right-handed."""


class ConfigError(QStarError):
    """Experiment configuration is malformed; ``pointer`` names the field."""

    def __init__(self, msg, pointer=""):
        super().__init__(f"{pointer or '<root>'}: {msg}")
        self.message = msg
        self.pointer = pointer
