# O2 cocycle workbench
# Numerical experiments for 2x2 orthogonal matrix cocycles over rotations and shifts

__version__ = "0.4.0"
TOOL_NAME = "o2-cocycle-workbench"
