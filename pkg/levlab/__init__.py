"""levlab: two-dimensional scattering and Levinson's theorem lab."""

from .levinson import verify_identity

__all__ = ["verify_identity"]
