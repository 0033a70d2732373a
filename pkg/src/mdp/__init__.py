"""Distributed mechanism-design platform.

Players connected over an arbitrary network register at local
registries, broadcast their private types, redundantly compute the
joint decision plus Groves/VCG taxes, exchange settlement schemes
through trusted registries, police falsified results, and survive
crash-stop failures, with no central authority in the loop.
"""

__version__ = "0.1.0"
