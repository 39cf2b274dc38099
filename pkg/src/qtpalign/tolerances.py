"""Numerical tolerances shared by every module."""

# algebraic identities that hold up to rounding
EXACT = 1e-12
# agreement between a fast path and the dense-operator oracle
ORACLE = 1e-10
# commutator norm below which two matrices are treated as commuting
COMMUTE = 1e-10
# minimum eigenvalue accepted for a positive semidefinite operator
POSITIVITY = 1e-10
# POVM weights below this are rejected
MIN_WEIGHT = 1e-14
# outcome probabilities below this carry no output state
ZERO_PROBABILITY = 1e-12
