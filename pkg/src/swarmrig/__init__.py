"""swarmrig: rigidity maintenance for multi-robot formations.

Builds weighted proximity frameworks, analyzes their rigidity spectrum,
runs a barrier-gradient controller that keeps the rigidity eigenvalue
above a safety floor, and estimates that eigenvalue and its eigenvector
fully distributedly over a message-passing network.
"""

from .backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
