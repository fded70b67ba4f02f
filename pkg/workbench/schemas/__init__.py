# Schemas package
# Pydantic models for configs, scans, verdicts and report envelopes
