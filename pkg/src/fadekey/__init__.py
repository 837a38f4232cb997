"""Monte Carlo engine for fading-generated secret keys under a colluding aperture eavesdropper."""

from fadekey._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
