"""Price regression with expert pivot-point correction and robust Bayesian uncertainty."""

__version__ = "0.1.0"
