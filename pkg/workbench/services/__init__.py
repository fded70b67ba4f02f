# Services module
# Dynamics, diagnostics and verdict engines, plus the experiment runner
