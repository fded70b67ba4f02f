# Utilities
# Angles, exact intervals, hashing, constants and the report language guard
