"""specdyn: certified-exact nonhomogeneous spectra, finite-window largeness
detectors, and suspension-flow return-time analysis."""

__version__ = "0.1.0"
