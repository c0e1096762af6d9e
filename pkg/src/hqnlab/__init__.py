"""Hierarchical Q-learning on impartial games.

Layers, bottom up: ``games`` (Wythoff, Nim, Euclid move rules), ``oracle``
(exact hot/cold labels), ``qagent`` (tabular Q-learning), ``mlp`` and
``modelnet`` (the hot/cold model network), ``controller`` (the outer loop with
drop detection and model memory), ``qnetwork`` (model-free baseline) and
``bench`` / ``cli`` (experiments and the command line).
"""
from .games import Move, MoveKind, Position, Rules

__version__ = "0.1.0"
__all__ = ["Move", "MoveKind", "Position", "Rules"]
