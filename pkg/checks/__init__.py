# Invariant Checks
