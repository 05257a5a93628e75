"""Walkthrough: dual-level F1 between predictions and references.

Scoring normalizes both texts, returns 1.0 when the normalized reference
is a substring of the prediction, otherwise falls back to token-set F1
and records which level produced the score.

Run:  python3 demos/02_scoring_texts.py
"""
from __future__ import annotations

from cliffpoint import dual_f1

cases = [
    ("The Cat Sat", "the cat sat"),            # identity after normalization
    ("well, the cat sat on the mat", "cat sat on the mat"),  # substring
    ("the cat sat", "cat sat down"),            # partial token overlap
    ("sat the cat", "the cat sat"),             # word order does not matter
    ("zebra quartz", "apple banana"),           # nothing shared
]

print(f"{'prediction':32s} {'reference':20s} {'f1':>6s}  level")
for pred, ref in cases:
    b = dual_f1(pred, ref)
    print(f"{pred!r:32s} {ref!r:20s} {b.f1:6.3f}  {b.matched_by}")

print()
b = dual_f1("the cat sat", "cat sat down")
print("breakdown for the partial case:")
print(f"  token precision {b.token_precision:.3f}, recall {b.token_recall:.3f}, "
      f"f1 {b.token_f1:.3f}")
print(f"  char fallback f1 {b.char_f1:.3f} (only consulted when tokens share nothing)")
