"""Competitive evaluation harness for machine-generated game-playing agents."""

import arena.games  # noqa: F401  (registers the nine environments)

__version__ = "0.1.0"
