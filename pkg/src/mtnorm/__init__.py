"""Hybrid Mandarin text normalization.

Non-standard words (digit/symbol tokens) are extracted from text, routed
through priority rules, an attention-based pattern classifier with a
legality mask, and per-pattern readers, then spliced back as spoken-form
words. A prioritized longest-context rule engine serves as both the
baseline and the fallback path.
"""

__version__ = "0.1.0"
