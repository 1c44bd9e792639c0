"""Rule-based proving of trigonometric identities with learned search guidance."""

__version__ = "0.1.0"
