"""Statistical learning toolkit and benchmark harness for movie-success modeling."""

__version__ = "0.1.0"
