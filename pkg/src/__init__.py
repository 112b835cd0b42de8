"""zzbound - Ziv-Zakai family of Bayesian lower bounds on the MMSE."""

__version__ = "0.1.0"
