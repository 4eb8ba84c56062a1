"""Top-level package for MetaQuant.

A hypernetwork (the MetaQuantNet) generates quantized per-layer weights for
a small target network from a per-layer bitwidth code.  The package trains
it under random bitwidth policies, searches the best hybrid policy under a
hard model-size constraint and retrains with the winner.  See `README.md`.
"""

__all__ = ["__version__"]
__version__ = "0.1.0"
