"""Feature attribution for parameterized quantum circuit classifiers."""

__version__ = "0.1.0"
