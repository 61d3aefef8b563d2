"""Hidden-subspace quantum money: exact desk-scale simulation toolkit."""

__version__ = "0.1.0"
