"""Numerical toolkit for the alpha-energy of SU(2) connections on the
4-sphere: instanton families, energy functionals, dilation profiles,
gradient flow, gauge projection, and a named verification suite."""

__version__ = "0.1.0"
