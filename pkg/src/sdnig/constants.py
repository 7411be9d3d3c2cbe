"""Repo-wide numerical tolerances."""

# exact identities (parametrization round trips, two formulas for one law)
EXACT_RTOL = 1e-12

# statistical checks: |estimate - target| <= STAT_Z * standard error
STAT_Z = 4.0
CORR_Z = 3.0

# two-sample distribution tests
KS_LEVEL = 0.01

# MC vs Fourier spread-price band (absolute currency units)
PRICE_ABS_BAND = 0.03

# relative-closure tolerance for matching IG_B shapes
SHAPE_RTOL = 1e-12
