"""clover: finite-model first-order logic solving and compositional translation."""

__version__ = "0.1.0"
