"""omegafactor: lazy forest factorizations of the countably-regular tree."""

__version__ = "0.3.0"
