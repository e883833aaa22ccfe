"""Two hopping-coupled Jaynes-Cummings cavities: product-form vs exact evolution."""

__version__ = "0.1.0"
