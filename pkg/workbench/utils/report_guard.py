# Report language guard
# Verdicts are heuristic; reports must never read as proofs

from typing import List

from .constants import FORBIDDEN_CLAIMS, HEURISTIC_LABEL
from ..errors import InvariantBreach


def find_forbidden_claims(text: str) -> List[str]:
    """
    Return every forbidden claim phrase found in text.

    The heuristic disclaimer itself mentions ergodicity, so it is
    removed before matching.
    """
    text_lower = text.replace(HEURISTIC_LABEL, "").lower()
    return sorted(term for term in FORBIDDEN_CLAIMS if term in text_lower)


def validate_report_language(text: str) -> tuple[bool, List[str]]:
    """
    Validate that a serialized report only uses the -consistent vocabulary.

    Returns:
        (is_clean, violations)
    """
    violations = [f"Forbidden claim found: '{term}'" for term in find_forbidden_claims(text)]
    return len(violations) == 0, violations


def ensure_report_language(text: str) -> str:
    """Raise InvariantBreach if the report overclaims; return text unchanged otherwise."""
    is_clean, violations = validate_report_language(text)
    if not is_clean:
        raise InvariantBreach("; ".join(violations))
    return text
