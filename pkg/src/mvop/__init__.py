"""Matrix-valued orthogonal polynomials from deformed matrix-valued classical pairs."""

__version__ = "0.1.0"
