"""solitonlab: numerical verification of curvature identities, algebraic
inequalities and integral estimates on gradient Ricci solitons."""

__version__ = "0.1.0"
