# Exterior Decay Lab - numerical checks of pointwise decay for 2D exterior elliptic problems

__version__ = "0.3.1"
