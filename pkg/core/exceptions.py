"""Custom exceptions for the kirchhoff-certify application."""

class KirchhoffError(Exception):
    """Base exception for all kirchhoff-certify errors."""
    pass

class InvalidGeometry(KirchhoffError):
    """Domain description is degenerate, nonconvex or otherwise unsupported."""
    pass

class MeshTooCoarse(KirchhoffError):
    """Mesh size leaves no interior node."""
    pass

class DimensionMismatch(KirchhoffError):
    """Field and operator live on different meshes."""
    pass

class PointLocationFailure(KirchhoffError):
    """A target node lies outside every source element."""
    pass

class EigenSolveError(KirchhoffError):
    """Principal eigenpair could not be computed."""
    pass

class NoConvergence(EigenSolveError):
    """Inverse iteration exhausted its iteration budget."""
    pass

class DomainOrderViolation(KirchhoffError):
    """Eigenvalue ratio contradicts the inclusion of the domains."""
    pass

class CoefficientError(KirchhoffError):
    """Invalid nonlocal coefficient M."""
    pass

class OutOfRange(CoefficientError):
    """M evaluated outside its admissible range."""
    pass

class PreconditionViolated(KirchhoffError):
    """An operation was called with inputs violating its precondition."""
    pass

class ConstructionError(KirchhoffError):
    """Error while building a counterexample."""
    pass

class NoAdmissibleTau(ConstructionError):
    """No enlargement parameter tau satisfies the eigenvalue ratio condition."""
    pass

class EmptyInterval(ConstructionError):
    """The open interval for Theta is empty."""
    pass

class PositivityFailure(ConstructionError):
    """Restricted eigenfunction is not positive on the closed domain."""
    pass

class BracketFailure(ConstructionError):
    """The epsilon search could not bracket the target norm."""
    pass

class ConfigurationError(KirchhoffError):
    """Scenario configuration is missing or invalid."""
    pass

class StorageError(KirchhoffError):
    """Error during report storage operations."""
    pass
