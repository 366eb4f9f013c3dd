"""Encrypted comparison and selection inside a levelled FV scheme.

Comparison is approximated by iterating the tanh doubling map
z <- z*(1.9142 - z^2) on the difference of the operands; selection applies
the resulting weights to the data, replacing branches that encrypted
evaluation cannot take.  The harness reproduces the published accuracy
tables and parameter sweeps.
"""

__version__ = "0.1.0"
