"""satlab: SAT ensembles, compression complexity and statistical distance."""

__version__ = "0.1.0"
