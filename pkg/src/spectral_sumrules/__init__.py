"""Sum rules for Jacobi matrices, tridiagonal beta ensembles and large deviation probes."""

__version__ = "0.1.0"
