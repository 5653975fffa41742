"""stepflow: voice-first scaffolded text composition engine."""

__version__ = "0.1.0"
