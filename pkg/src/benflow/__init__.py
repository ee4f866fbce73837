"""benflow - Fitzpatrick representatives and BEN null-minimization for monotone flows."""

__version__ = "0.3.0"
__author__ = "benflow contributors"
