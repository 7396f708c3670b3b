"""Digital simulation of bosonic interferometers on qubit registers."""

__version__ = "0.1.0"
