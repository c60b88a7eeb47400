"""geostoch: P-parameterized stochastic integrals of 1-forms along Brownian paths."""

__version__ = "0.3.0"
__author__ = "Jaeha Yoo"
