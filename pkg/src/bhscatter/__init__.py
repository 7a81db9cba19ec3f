"""Direct and inverse scattering for charged Dirac fields on (de Sitter-)
Reissner-Nordstrom black holes."""

__version__ = "0.1.0"
