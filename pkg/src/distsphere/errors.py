"""Exception taxonomy. Every error carries a short machine-readable code."""


class DistsphereError(Exception):
    """Base class for all library errors."""

    code = "error"


class UsageError(DistsphereError):
    """Bad command-line usage or invalid configuration."""

    code = "usage"


class DomainError(DistsphereError):
    """Input outside its admissible domain (coordinates, ranges, levels)."""

    code = "domain"


class EmptySetError(DistsphereError):
    """A set specification realizes to zero sites."""

    code = "empty-set"


class ResourceGuardError(DistsphereError):
    """Requested computation exceeds the built-in size guards."""

    code = "resource-guard"


class ResolutionError(DistsphereError):
    """A cube or region is finer than the field it is measured against."""

    code = "resolution"


class UnsupportedDimensionError(DistsphereError):
    """Operation only implemented for a specific dimension."""

    code = "unsupported-dimension"


class SingularPointError(DistsphereError):
    """Map evaluated at a singular point."""

    code = "singular"


class EmptySampleError(DistsphereError):
    """An audit requested samples from an empty contour."""

    code = "empty-sample"


class ReportKindError(DistsphereError):
    """Renderer fed a report of the wrong kind."""

    code = "report-kind"


class CertificateError(DistsphereError):
    """A mathematical certificate failed to verify."""

    code = "certificate"


class ContentNotSmallError(CertificateError):
    """Cover cost is not below the threshold required for a certified split."""

    code = "content-not-small"
