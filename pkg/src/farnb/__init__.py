"""Feature-augmented regularized naive Bayes."""

__version__ = "0.1.0"
