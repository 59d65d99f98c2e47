# Intermediate vertex subalgebra q-series engine
__version__ = "0.1.0"
