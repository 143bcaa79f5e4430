"""Independent reference computations for the test suite.

Nothing here imports the package under test.  ``python -m oracles.derive``
(run from ``tests/``) prints every frozen value the tests compare against.
"""
