"""randlab: a desk-scale laboratory for uniform randomness tests.

Exact rational arithmetic throughout; complexity quantities are upper bounds
obtained from a budgeted enumeration of a concrete prefix-free machine.
"""

__version__ = "0.1.0"
