"""Dual-level answer scoring.

The score compares a predicted answer against a reference at three levels,
cheapest first: containment of the normalized reference, token-set overlap,
and a character-length fallback.  The fallback can only be reached after
containment has already failed, which forces its recall term to zero; it is
kept because the reported breakdown distinguishes "no token overlap" from
"empty prediction".
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidReferenceError

__all__ = ["F1Breakdown", "normalize_text", "dual_f1"]


@dataclass(frozen=True)
class F1Breakdown:
    """Final score plus the per-level components that produced it."""

    f1: float
    token_precision: float
    token_recall: float
    token_f1: float
    char_precision: float
    char_recall: float
    char_f1: float
    matched_by: str  # substring | token | char | none

    def to_dict(self) -> dict:
        return {
            "f1": self.f1,
            "token_precision": self.token_precision,
            "token_recall": self.token_recall,
            "token_f1": self.token_f1,
            "char_precision": self.char_precision,
            "char_recall": self.char_recall,
            "char_f1": self.char_f1,
            "matched_by": self.matched_by,
        }


def normalize_text(text: str) -> str:
    """Lowercase, trim, and collapse internal whitespace runs to single spaces."""
    return " ".join(text.lower().split())


def _token_scores(pred: str, ref: str) -> tuple[float, float, float]:
    # Tokens are whitespace-delimited words compared as sets.
    t_pred = set(pred.split())
    t_ref = set(ref.split())
    common = len(t_pred & t_ref)
    if not t_pred or not t_ref:
        return 0.0, 0.0, 0.0
    precision = common / len(t_pred)
    recall = common / len(t_ref)
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def dual_f1(prediction: str, reference: str) -> F1Breakdown:
    """Score a prediction against a reference.

    A reference that normalizes to the empty string is a data error.  An
    empty prediction scores zero with matched_by="none".  If the normalized
    reference appears verbatim inside the normalized prediction the answer
    counts as fully correct (f1 = 1) regardless of extra surrounding text.
    Otherwise the score is the token-set F1; when even that is zero, the
    character-level fallback runs and reports its components.

    Token components are always computed from the normalized texts so they
    stay comparable across match levels; they depend only on the word sets,
    never on word order.
    """
    ref = normalize_text(reference)
    if not ref:
        raise InvalidReferenceError("reference is empty after normalization")
    pred = normalize_text(prediction)
    if not pred:
        return F1Breakdown(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, "none")

    tp, tr, tf1 = _token_scores(pred, ref)

    if ref in pred:
        return F1Breakdown(1.0, tp, tr, tf1, 0.0, 0.0, 0.0, "substring")

    if tf1 > 0.0:
        return F1Breakdown(tf1, tp, tr, tf1, 0.0, 0.0, 0.0, "token")

    # Character fallback.  Recall is 1 only for containment, which was
    # already handled above, so this branch always yields zero.
    char_precision = min(1.0, len(ref) / len(pred))
    char_recall = 1.0 if ref in pred else 0.0
    char_f1 = (
        2 * char_precision * char_recall / (char_precision + char_recall)
        if char_precision + char_recall > 0
        else 0.0
    )
    return F1Breakdown(char_f1, tp, tr, tf1, char_precision, char_recall, char_f1, "char")
