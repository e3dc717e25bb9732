"""Group classification toolkit for nonlinear Schrodinger equations i psi_t + Lap psi + F = 0."""
__version__ = "0.1.0"
