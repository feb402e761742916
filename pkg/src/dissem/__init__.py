"""Coded-broadcast scheduling for data dissemination on directed networks.

A node network where each node holds some symbols and wants others; nodes
broadcast linear combinations over GF(q) in synchronous rounds.  The library
computes optimal one-round schemes by constrained rank minimization, graph
bounds for the transmitter/receiver (bipartite) special case, and multi-round
schemes driven by a star-pattern matrix algebra, all checked against a
symbolic protocol simulator.
"""

from dissem.instance import DisseminationInstance
from dissem.network import DirectedNetwork

__all__ = ["DisseminationInstance", "DirectedNetwork"]
__version__ = "0.1.0"
