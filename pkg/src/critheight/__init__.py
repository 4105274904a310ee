"""Critical heights and post-critically finite polynomials over Q."""

__version__ = "0.1.0"
